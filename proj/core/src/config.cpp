#include "faitheval/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "faitheval/text.hpp"

namespace faitheval {

namespace {

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        std::uint64_t out = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" +
                          value + "'");
    }
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        double out = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" +
                          value + "'");
    }
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string current;
    for (char c : value) {
        if (c == ',') {
            auto piece = trim(current);
            if (!piece.empty()) out.emplace_back(piece);
            current.clear();
        } else {
            current += c;
        }
    }
    auto piece = trim(current);
    if (!piece.empty()) out.emplace_back(piece);
    return out;
}

// key shapes: "dataset.<id>.<field>", "backend.<id>.<field>"
bool split_scoped(const std::string& key, std::string_view prefix,
                  std::string& id, std::string& field) {
    if (key.rfind(prefix, 0) != 0 || key.size() <= prefix.size() ||
        key[prefix.size()] != '.')
        return false;
    std::string rest = key.substr(prefix.size() + 1);
    auto dot = rest.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == rest.size())
        return false;
    id = rest.substr(0, dot);
    field = rest.substr(dot + 1);
    return true;
}

}  // namespace

std::string interpolate_env(const std::string& value) {
    std::string out;
    std::size_t pos = 0;
    while (pos < value.size()) {
        auto open = value.find("${", pos);
        if (open == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        auto close = value.find('}', open + 2);
        if (close == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        out += value.substr(pos, open - pos);
        std::string name = value.substr(open + 2, close - open - 2);
        if (const char* env = std::getenv(name.c_str())) out += env;
        pos = close + 1;
    }
    return out;
}

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
    RunConfig config;
    std::size_t line_no = 0;
    for (const auto& line : split_lines(text)) {
        ++line_no;
        auto trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto eq = trimmed.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key(trim(trimmed.substr(0, eq)));
        std::string value(trim(trimmed.substr(eq + 1)));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": empty key");
        if (config.raw.count(key))
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": duplicate key '" + key + "'");
        config.raw[key] = value;
    }

    // scoped keys first: datasets and backends keep config order via an
    // ordered id scan
    std::vector<std::string> dataset_ids;
    std::vector<std::string> backend_ids;
    for (const auto& [key, value] : config.raw) {
        std::string id;
        std::string field;
        if (split_scoped(key, "dataset", id, field)) {
            if (std::find(dataset_ids.begin(), dataset_ids.end(), id) ==
                dataset_ids.end())
                dataset_ids.push_back(id);
        } else if (split_scoped(key, "backend", id, field)) {
            if (std::find(backend_ids.begin(), backend_ids.end(), id) ==
                backend_ids.end())
                backend_ids.push_back(id);
        }
    }

    auto scoped = [&](const std::string& scope, const std::string& id,
                      const std::string& field) -> std::optional<std::string> {
        auto it = config.raw.find(scope + "." + id + "." + field);
        if (it == config.raw.end()) return std::nullopt;
        return it->second;
    };

    for (const auto& id : dataset_ids) {
        DatasetRef ref;
        ref.id = id;
        auto path = scoped("dataset", id, "path");
        if (!path)
            throw ConfigError("dataset '" + id + "': missing .path");
        ref.path = interpolate_env(*path);
        try {
            ref.format = format_from_name(
                scoped("dataset", id, "format").value_or("native_jsonl"));
            ref.task = task_from_name(
                scoped("dataset", id, "task").value_or("summarization"));
        } catch (const UsageError& e) {
            throw ConfigError("dataset '" + id + "': " + e.what());
        }
        config.datasets.push_back(std::move(ref));
    }

    for (const auto& id : backend_ids) {
        BackendSpec spec;
        spec.id = id;
        spec.endpoint = interpolate_env(
            scoped("backend", id, "endpoint").value_or(""));
        spec.model_name = scoped("backend", id, "model").value_or(id);
        spec.auth_env = scoped("backend", id, "auth_env").value_or("");
        if (auto v = scoped("backend", id, "max_parallel"))
            spec.max_parallel = static_cast<int>(
                parse_u64(*v, "backend." + id + ".max_parallel"));
        if (spec.max_parallel < 1)
            throw ConfigError("backend '" + id + "': max_parallel must be "
                              ">= 1");
        if (auto v = scoped("backend", id, "max_attempts"))
            spec.retry.max_attempts = static_cast<int>(
                parse_u64(*v, "backend." + id + ".max_attempts"));
        if (spec.retry.max_attempts < 1)
            throw ConfigError("backend '" + id + "': max_attempts must be "
                              ">= 1");
        if (auto v = scoped("backend", id, "base_backoff_ms"))
            spec.retry.base_backoff = std::chrono::milliseconds(
                parse_u64(*v, "backend." + id + ".base_backoff_ms"));
        if (auto v = scoped("backend", id, "timeout_ms"))
            spec.timeout = std::chrono::milliseconds(
                parse_u64(*v, "backend." + id + ".timeout_ms"));
        std::string role = scoped("backend", id, "role").value_or("judge");
        if (role == "judge") {
            config.judges.push_back(std::move(spec));
        } else if (role == "candidate") {
            config.candidates.push_back(std::move(spec));
        } else {
            throw ConfigError("backend '" + id + "': unknown role '" + role +
                              "' (expected judge or candidate)");
        }
    }

    if (config.raw.count("detector.id") ||
        config.raw.count("detector.endpoint") ||
        config.raw.count("detector.command")) {
        DetectorSpec detector;
        detector.id = config.raw.count("detector.id")
                          ? config.raw.at("detector.id")
                          : "detector";
        if (config.raw.count("detector.endpoint"))
            detector.endpoint =
                interpolate_env(config.raw.at("detector.endpoint"));
        if (config.raw.count("detector.command")) {
            std::istringstream is(
                interpolate_env(config.raw.at("detector.command")));
            std::string arg;
            while (is >> arg) detector.command.push_back(arg);
        }
        if (config.raw.count("detector.threshold"))
            detector.threshold = parse_double(
                config.raw.at("detector.threshold"), "detector.threshold");
        if (detector.threshold < 0.0 || detector.threshold > 1.0)
            throw ConfigError("detector.threshold must lie in [0, 1]");
        config.detector = std::move(detector);
    }

    auto plain = [&](const std::string& key) -> std::optional<std::string> {
        auto it = config.raw.find(key);
        if (it == config.raw.end()) return std::nullopt;
        return it->second;
    };

    try {
        if (auto v = plain("mode")) config.mode = mode_from_name(*v);
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
    if (auto v = plain("flavor")) {
        static const std::set<std::string> known = {
            "annotated", "facts_json", "chain_of_thought", "claims"};
        if (!known.count(*v))
            throw ConfigError("unknown flavor '" + *v + "'");
        config.flavor = *v;
    }
    if (auto v = plain("scorer")) {
        if (*v != "judge" && *v != "detector")
            throw ConfigError("scorer must be 'judge' or 'detector'");
        config.scorer = *v;
    }
    if (auto v = plain("max_examples")) {
        config.max_examples = (*v == "all")
                                  ? kAllExamples
                                  : static_cast<std::size_t>(
                                        parse_u64(*v, "max_examples"));
    }
    if (auto v = plain("sweep_ks")) {
        for (const auto& piece : split_list(*v))
            config.sweep_ks.push_back(
                static_cast<std::size_t>(parse_u64(piece, "sweep_ks")));
    }
    if (auto v = plain("cache_dir")) config.cache_dir = interpolate_env(*v);
    if (auto v = plain("out_dir")) config.out_dir = interpolate_env(*v);
    if (auto v = plain("template_dir"))
        if (!v->empty()) config.template_dir = interpolate_env(*v);
    if (auto v = plain("seed")) config.seed = parse_u64(*v, "seed");
    if (auto v = plain("subset_cap")) {
        config.subset_cap =
            static_cast<std::size_t>(parse_u64(*v, "subset_cap"));
        if (config.subset_cap == 0)
            throw ConfigError("subset_cap must be positive");
    }
    return config;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig config = parse_config_text(buf.str(), path.string());
    config.base_dir = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
    for (auto& ref : config.datasets) {
        if (ref.path.is_relative()) ref.path = config.base_dir / ref.path;
    }
    return config;
}

}  // namespace faitheval
