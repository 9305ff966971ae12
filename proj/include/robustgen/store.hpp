#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "robustgen/record.hpp"

namespace robustgen {

// Append-only JSONL record store backing resumable sweeps. One record per
// line; a sweep that is re-run skips (config, seed) pairs already present.
// rewrite() replaces the whole file atomically (write temp, rename) and is
// how measure vectors get attached after the fact.
class RecordStore {
public:
    // Opens (or creates lazily on first append) the store at `path`.
    explicit RecordStore(std::string path);

    const std::string& path() const { return path_; }
    const std::vector<ExperimentRecord>& records() const { return records_; }
    bool has(const HyperparameterConfig& config, std::uint64_t seed) const;

    void append(const ExperimentRecord& r);
    void rewrite(std::vector<ExperimentRecord> records);

private:
    std::string key_of(const HyperparameterConfig& config, std::uint64_t seed) const;

    std::string path_;
    std::vector<ExperimentRecord> records_;
    std::set<std::string> keys_;
};

// Convenience filter: the records analysis may use (status converged).
std::vector<ExperimentRecord> filter_converged(const std::vector<ExperimentRecord>& records);

}  // namespace robustgen
