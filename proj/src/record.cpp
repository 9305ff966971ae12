#include "robustgen/record.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "robustgen/errors.hpp"

namespace robustgen {

using nlohmann::json;

namespace {

// JSON has no NaN/Inf literals; null stands in for them on disk.
json num_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

double null_or_num(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

}  // namespace

std::string ExperimentRecord::to_json_line() const {
    json j;
    j["v"] = schema_version;
    j["lr"] = config.learning_rate;
    j["depth"] = config.depth;
    j["width"] = config.width;
    j["ds"] = config.dataset_id;
    j["m"] = config.train_size;
    j["seed"] = seed;
    j["status"] = run_status_name(status);
    j["diverged"] = diverged;
    j["train_error"] = num_or_null(train_error);
    j["test_error"] = num_or_null(test_error);
    j["gap"] = num_or_null(gap);
    j["final_ce"] = num_or_null(final_cross_entropy);
    j["epochs_run"] = epochs_run;
    j["m_train"] = train_set_size;
    j["m_test"] = test_set_size;
    j["checkpoint"] = checkpoint_path;
    j["manifest_hash"] = manifest_hash;
    json ms = json::object();
    for (const auto& [name, value] : measures)
        ms[name] = value.has_value() ? json(*value) : json(nullptr);
    j["measures"] = std::move(ms);
    return j.dump();
}

ExperimentRecord ExperimentRecord::from_json_line(const std::string& line, std::size_t lineno) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError("record line " + std::to_string(lineno) + ": " + e.what(),
                         static_cast<long long>(lineno));
    }
    ExperimentRecord r;
    try {
        r.schema_version = j.at("v").get<int>();
        if (r.schema_version != 1)
            throw VersionError("record schema version " + std::to_string(r.schema_version) +
                               " is not supported");
        r.config.learning_rate = j.at("lr").get<double>();
        r.config.depth = j.at("depth").get<int>();
        r.config.width = j.at("width").get<int>();
        r.config.dataset_id = j.at("ds").get<std::string>();
        r.config.train_size = j.at("m").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.status = run_status_from_name(j.at("status").get<std::string>());
        r.diverged = j.at("diverged").get<bool>();
        r.train_error = null_or_num(j.at("train_error"));
        r.test_error = null_or_num(j.at("test_error"));
        r.gap = null_or_num(j.at("gap"));
        r.final_cross_entropy = null_or_num(j.at("final_ce"));
        r.epochs_run = j.at("epochs_run").get<int>();
        r.train_set_size = j.at("m_train").get<int>();
        r.test_set_size = j.at("m_test").get<int>();
        r.checkpoint_path = j.at("checkpoint").get<std::string>();
        r.manifest_hash = j.at("manifest_hash").get<std::string>();
        for (const auto& [name, value] : j.at("measures").items()) {
            if (value.is_null())
                r.measures[name] = std::nullopt;
            else
                r.measures[name] = value.get<double>();
        }
    } catch (const json::exception& e) {
        throw ParseError("record line " + std::to_string(lineno) + ": " + e.what(),
                         static_cast<long long>(lineno));
    }
    return r;
}

}  // namespace robustgen
