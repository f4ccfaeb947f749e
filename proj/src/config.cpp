#include "pvariv/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pvariv/errors.hpp"

namespace pvariv {

namespace {

using nlohmann::json;

void skip_ws(const std::string& s, size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n' || s[pos] == '\r'))
        ++pos;
}

json parse_value(const std::string& s, size_t& pos);

json parse_array(const std::string& s, size_t& pos) {
    json arr = json::array();
    ++pos;  // consume '['
    skip_ws(s, pos);
    if (pos < s.size() && s[pos] == ']') {
        ++pos;
        return arr;
    }
    while (pos < s.size()) {
        arr.push_back(parse_value(s, pos));
        skip_ws(s, pos);
        if (pos < s.size() && s[pos] == ',') {
            ++pos;
            skip_ws(s, pos);
            if (pos < s.size() && s[pos] == ']') {  // trailing comma
                ++pos;
                return arr;
            }
            continue;
        }
        if (pos < s.size() && s[pos] == ']') {
            ++pos;
            return arr;
        }
        fail(errc::parse_error, "malformed TOML array");
    }
    fail(errc::parse_error, "unterminated TOML array");
}

json parse_value(const std::string& s, size_t& pos) {
    skip_ws(s, pos);
    require(pos < s.size(), errc::parse_error, "missing TOML value");
    const char c = s[pos];
    if (c == '[') return parse_array(s, pos);
    if (c == '"' || c == '\'') {
        const char quote = c;
        ++pos;
        std::string out;
        while (pos < s.size() && s[pos] != quote) out += s[pos++];
        require(pos < s.size(), errc::parse_error, "unterminated TOML string");
        ++pos;
        return out;
    }
    size_t end = pos;
    while (end < s.size() && s[end] != ',' && s[end] != ']' && s[end] != '\n' && s[end] != '#' &&
           s[end] != '\r')
        ++end;
    std::string tok = s.substr(pos, end - pos);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.pop_back();
    pos = end;
    if (tok == "true") return true;
    if (tok == "false") return false;
    require(!tok.empty(), errc::parse_error, "empty TOML value");
    if (tok.find_first_of(".eE") == std::string::npos && tok.find("inf") == std::string::npos &&
        tok.find("nan") == std::string::npos) {
        long long v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec == std::errc() && p == tok.data() + tok.size()) return v;
    }
    double d = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (ec == std::errc() && p == tok.data() + tok.size()) return d;
    fail(errc::parse_error, "cannot parse TOML value '" + tok + "'");
}

}  // namespace

nlohmann::json parse_toml_text(const std::string& text) {
    json doc = json::object();
    json* scope = &doc;

    std::istringstream in(text);
    std::string line;
    std::string pending;
    std::string pending_key;
    int depth = 0;

    auto strip_comment = [](std::string s) {
        bool in_str = false;
        char quote = 0;
        for (size_t i = 0; i < s.size(); ++i) {
            if (in_str) {
                if (s[i] == quote) in_str = false;
            } else if (s[i] == '"' || s[i] == '\'') {
                in_str = true;
                quote = s[i];
            } else if (s[i] == '#') {
                return s.substr(0, i);
            }
        }
        return s;
    };

    auto commit = [&](const std::string& key, const std::string& value_text) {
        size_t pos = 0;
        const json v = parse_value(value_text, pos);
        size_t rest = pos;
        skip_ws(value_text, rest);
        require(rest >= value_text.size(), errc::parse_error,
                "trailing characters after TOML value for '" + key + "'");
        (*scope)[key] = v;
    };

    while (std::getline(in, line)) {
        line = strip_comment(line);
        const auto first = line.find_first_not_of(" \t\r");
        if (depth == 0) {
            if (first == std::string::npos) continue;
            if (line[first] == '[' && line.find('=') == std::string::npos) {
                const auto close = line.find(']', first);
                require(close != std::string::npos, errc::parse_error, "unterminated section");
                const std::string name = line.substr(first + 1, close - first - 1);
                doc[name] = json::object();
                scope = &doc[name];
                continue;
            }
            const auto eq = line.find('=');
            require(eq != std::string::npos, errc::parse_error,
                    "expected 'key = value' in TOML line: " + line);
            std::string key = line.substr(first, eq - first);
            while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
            require(!key.empty(), errc::parse_error, "empty TOML key");
            std::string rhs = line.substr(eq + 1);
            for (char c : rhs) depth += (c == '[') - (c == ']');
            if (depth > 0) {
                pending_key = key;
                pending = rhs + "\n";
            } else {
                commit(key, rhs);
            }
        } else {
            for (char c : line) depth += (c == '[') - (c == ']');
            pending += line + "\n";
            if (depth == 0) {
                commit(pending_key, pending);
                pending.clear();
            }
        }
    }
    require(depth == 0, errc::parse_error, "unterminated TOML array");
    return doc;
}

namespace {

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
    require(j.is_array() && !j.empty() && j[0].is_array(), errc::parse_error,
            what + " must be a nested array");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        require(static_cast<int>(j[r].size()) == cols, errc::parse_error, what + " is ragged");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

}  // namespace

McConfig mc_config_from_json(const nlohmann::json& j) {
    McConfig cfg = McConfig::paper_default();
    if (j.contains("N")) cfg.n_units = j["N"].get<int>();
    if (j.contains("T")) cfg.n_periods = j["T"].get<int>();
    if (j.contains("phi")) {
        cfg.phi.clear();
        for (const auto& lag : j["phi"]) cfg.phi.push_back(matrix_from_json(lag, "phi lag"));
    }
    if (j.contains("sigma")) cfg.sigma = matrix_from_json(j["sigma"], "sigma");
    if (j.contains("b")) {
        const auto& arr = j["b"];
        cfg.b.resize(static_cast<int>(arr.size()));
        for (int i = 0; i < cfg.b.size(); ++i) cfg.b(i) = arr[i].get<double>();
    }
    if (j.contains("mu_z")) cfg.mu_z = j["mu_z"].get<double>();
    if (j.contains("sigma_z")) cfg.sigma_z = j["sigma_z"].get<double>();
    if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("H")) cfg.horizon = j["H"].get<int>();
    if (j.contains("reps")) cfg.reps = j["reps"].get<int>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("response_var")) cfg.response_var = j["response_var"].get<int>();
    if (j.contains("variance")) {
        const std::string v = j["variance"].get<std::string>();
        require(v == "iid" || v == "cluster", errc::parse_error,
                "variance must be 'iid' or 'cluster'");
        cfg.variance = v == "iid" ? VarianceMode::iid : VarianceMode::cluster;
    }
    if (j.contains("burn_in")) cfg.burn_in = j["burn_in"].get<int>();
    if (j.contains("allow_nonstationary"))
        cfg.allow_nonstationary = j["allow_nonstationary"].get<bool>();
    if (j.contains("grid_points")) cfg.grid_points = j["grid_points"].get<int>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    cfg.validate();
    return cfg;
}

nlohmann::json mc_config_to_json(const McConfig& cfg) {
    json j;
    j["N"] = cfg.n_units;
    j["T"] = cfg.n_periods;
    json phi = json::array();
    for (const auto& lag : cfg.phi) {
        json rows = json::array();
        for (int r = 0; r < lag.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < lag.cols(); ++c) row.push_back(lag(r, c));
            rows.push_back(row);
        }
        phi.push_back(rows);
    }
    j["phi"] = phi;
    json sig = json::array();
    for (int r = 0; r < cfg.sigma.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < cfg.sigma.cols(); ++c) row.push_back(cfg.sigma(r, c));
        sig.push_back(row);
    }
    j["sigma"] = sig;
    json b = json::array();
    for (int i = 0; i < cfg.b.size(); ++i) b.push_back(cfg.b(i));
    j["b"] = b;
    j["mu_z"] = cfg.mu_z;
    j["sigma_z"] = cfg.sigma_z;
    j["gamma"] = cfg.gamma;
    j["H"] = cfg.horizon;
    j["reps"] = cfg.reps;
    j["alpha"] = cfg.alpha;
    j["seed"] = cfg.seed;
    j["response_var"] = cfg.response_var;
    j["variance"] = variance_mode_name(cfg.variance);
    j["burn_in"] = cfg.burn_in;
    j["allow_nonstationary"] = cfg.allow_nonstationary;
    j["grid_points"] = cfg.grid_points;
    j["threads"] = cfg.threads;
    return j;
}

McConfig load_mc_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_error, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    const bool is_json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    try {
        if (is_json) return mc_config_from_json(nlohmann::json::parse(text));
        return mc_config_from_json(parse_toml_text(text));
    } catch (const nlohmann::json::exception& e) {
        fail(errc::parse_error, "config '" + path + "': " + e.what());
    }
}

}  // namespace pvariv
