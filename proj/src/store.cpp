#include "robustgen/store.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "robustgen/errors.hpp"

namespace robustgen {

RecordStore::RecordStore(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;  // fresh store
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ExperimentRecord r = ExperimentRecord::from_json_line(line, lineno);
        keys_.insert(key_of(r.config, r.seed));
        records_.push_back(std::move(r));
    }
}

std::string RecordStore::key_of(const HyperparameterConfig& config, std::uint64_t seed) const {
    return config.key() + "#" + std::to_string(seed);
}

bool RecordStore::has(const HyperparameterConfig& config, std::uint64_t seed) const {
    return keys_.count(key_of(config, seed)) > 0;
}

void RecordStore::append(const ExperimentRecord& r) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) throw IngestionError("cannot open record store for append: " + path_);
    out << r.to_json_line() << '\n';
    out.flush();
    if (!out) throw IngestionError("short write on record store: " + path_);
    keys_.insert(key_of(r.config, r.seed));
    records_.push_back(r);
}

void RecordStore::rewrite(std::vector<ExperimentRecord> records) {
    const std::string tmp = path_ + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw IngestionError("cannot open temp store: " + tmp);
        for (const auto& r : records) out << r.to_json_line() << '\n';
        out.flush();
        if (!out) throw IngestionError("short write on temp store: " + tmp);
    }
    std::filesystem::rename(tmp, path_);
    records_ = std::move(records);
    keys_.clear();
    for (const auto& r : records_) keys_.insert(key_of(r.config, r.seed));
}

std::vector<ExperimentRecord> filter_converged(const std::vector<ExperimentRecord>& records) {
    std::vector<ExperimentRecord> out;
    for (const auto& r : records)
        if (r.status == RunStatus::converged) out.push_back(r);
    return out;
}

}  // namespace robustgen
