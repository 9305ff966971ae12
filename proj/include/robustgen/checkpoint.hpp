#pragma once

#include <cstdint>
#include <string>

#include "robustgen/network.hpp"

namespace robustgen::nn {

// A trained network bound to the run that produced it. JSON on disk, doubles
// serialized with shortest round-trip formatting, so save -> load -> save is
// byte-stable and weights survive bit-exactly.
struct Checkpoint {
    int format_version = 1;
    std::string config_id;
    std::uint64_t seed = 0;
    Network net;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);

// Throws ParseError (with byte offset) on corrupt files and VersionError on
// an unknown format_version.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace robustgen::nn
