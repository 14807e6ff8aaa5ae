#include "aoi/config.hpp"

#include <fstream>
#include <sstream>

#include "aoi/errors.hpp"

namespace aoi::cfg {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

} // namespace

KeyValues KeyValues::parse_text(const std::string& text) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(line_no) + " is not 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw IoError("config line " + std::to_string(line_no) + " has no key");
        kv.values_[key] = value;
    }
    return kv;
}

KeyValues KeyValues::parse_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config file " + file.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_text(buffer.str());
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long KeyValues::get_int(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw IoError("config key '" + key + "' is not an integer: " + it->second);
    }
}

double KeyValues::get_real(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw IoError("config key '" + key + "' is not a number: " + it->second);
    }
}

std::vector<double> KeyValues::get_real_list(const std::string& key,
                                             const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const std::string& part : split_commas(it->second)) {
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw IoError("config key '" + key + "' has a non-numeric item: " + part);
        }
    }
    return out;
}

std::vector<int> KeyValues::get_int_list(const std::string& key,
                                         const std::vector<int>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    for (const std::string& part : split_commas(it->second)) {
        const auto dots = part.find("..");
        try {
            if (dots != std::string::npos) {
                const int lo = std::stoi(part.substr(0, dots));
                const int hi = std::stoi(part.substr(dots + 2));
                for (int v = lo; v <= hi; ++v) out.push_back(v);
            } else {
                out.push_back(std::stoi(part));
            }
        } catch (const std::exception&) {
            throw IoError("config key '" + key + "' has a non-integer item: " + part);
        }
    }
    return out;
}

std::uint64_t default_seed(const std::string& experiment) {
    std::uint64_t hash = 14695981039346656037ull; // FNV-1a
    for (unsigned char c : experiment) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return 42 + hash;
}

ExperimentConfig experiment_config_from(const KeyValues& kv) {
    ExperimentConfig ec;
    ec.experiment = kv.get_string("experiment", ec.experiment);
    ec.shape.clusters = static_cast<int>(kv.get_int("C", ec.shape.clusters));
    ec.shape.users_per_cluster = static_cast<int>(kv.get_int("N", ec.shape.users_per_cluster));
    ec.w_list = kv.get_real_list("w", ec.w_list);
    ec.z_list = kv.get_int_list("z", ec.z_list);
    ec.s_list = kv.get_real_list("s", ec.s_list);
    ec.r_list = kv.get_real_list("r", ec.r_list);
    ec.h_list = kv.get_int_list("H", ec.h_list);
    ec.slots = kv.get_int("slots", ec.slots);
    ec.runs = static_cast<int>(kv.get_int("runs", ec.runs));
    ec.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
    ec.k_trunc = static_cast<int>(kv.get_int("k_trunc", ec.k_trunc));
    ec.r_step = kv.get_real("r_step", ec.r_step);
    ec.p_step = kv.get_real("p_step", ec.p_step);
    ec.h_max = static_cast<int>(kv.get_int("h_max", ec.h_max));
    ec.sweep_slots = kv.get_int("sweep_slots", ec.sweep_slots);
    ec.sweep_runs = static_cast<int>(kv.get_int("sweep_runs", ec.sweep_runs));
    ec.budget = kv.get_int("budget", ec.budget);
    ec.out_dir = kv.get_string("out", ec.out_dir);
    ec.format = kv.get_string("format", ec.format);
    ec.seq_file = kv.get_string("seq_file", ec.seq_file);
    ec.threads = static_cast<int>(kv.get_int("threads", ec.threads));
    if (ec.seed == 0 && !ec.experiment.empty()) ec.seed = default_seed(ec.experiment);
    return ec;
}

} // namespace aoi::cfg
