#include "rsmfg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsmfg/errors.hpp"

using nlohmann::json;

namespace rsmfg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

IniConfig IniConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

IniConfig IniConfig::parse_string(const std::string& text) {
    IniConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        // ';' also separates matrix rows, so only strip it when it starts a token
        if (comment != std::string::npos && line[comment] == '#') line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw DomainError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

bool IniConfig::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string IniConfig::get_string(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw DomainError("config missing [" + section + "] " + key);
    return data_.at(section).at(key);
}

std::string IniConfig::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    return has(section, key) ? data_.at(section).at(key) : fallback;
}

double IniConfig::get_double(const std::string& section, const std::string& key) const {
    return std::stod(get_string(section, key));
}

double IniConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? std::stod(data_.at(section).at(key)) : fallback;
}

long IniConfig::get_long(const std::string& section, const std::string& key, long fallback) const {
    return has(section, key) ? std::stol(data_.at(section).at(key)) : fallback;
}

std::vector<double> IniConfig::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& tok : split(get_string(section, key), ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

std::vector<double> IniConfig::get_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
    return has(section, key) ? get_list(section, key) : fallback;
}

Matrix IniConfig::get_matrix(const std::string& section, const std::string& key) const {
    const auto rows = split(get_string(section, key), ';');
    const int d = static_cast<int>(rows.size());
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
        std::vector<double> vals;
        // rows use whitespace or commas between entries
        std::string normalized = rows[i];
        std::replace(normalized.begin(), normalized.end(), ',', ' ');
        std::stringstream ss(normalized);
        double v;
        while (ss >> v) vals.push_back(v);
        if (static_cast<int>(vals.size()) != d)
            throw DomainError("config [" + section + "] " + key + ": matrix must be square");
        for (int j = 0; j < d; ++j) m(i, j) = vals[j];
    }
    return m;
}

void IniConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
}

std::string IniConfig::canonical() const {
    std::string out;
    for (const auto& [section, kv] : data_) {
        out += "[" + section + "]\n";
        for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    }
    return out;
}

uint64_t config_hash(const IniConfig& cfg) {
    const std::string text = cfg.canonical();
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string config_hash_hex(const IniConfig& cfg) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

ModelBundle build_model(const IniConfig& cfg) {
    ModelBundle out;
    out.kind = cfg.get_string("model", "kind", "benchmark");

    if (out.kind == "benchmark") {
        BenchmarkInstance inst = default_benchmark();
        inst.beta = cfg.get_double("model", "beta", inst.beta);
        inst.kappa_star = cfg.get_double("model", "kappa_star", inst.kappa_star);
        inst.delta = cfg.get_list("model", "delta", inst.delta);
        inst.sigma = cfg.get_list("model", "sigma", inst.sigma);
        if (cfg.has("chain", "q")) inst.rate_matrix = cfg.get_matrix("chain", "q");
        if (static_cast<int>(inst.delta.size()) != inst.rate_matrix.rows())
            throw DomainError("config: delta/sigma size must match the chain dimension");
        inst.k1 = cfg.get_double("profit", "k1", inst.k1);
        inst.k2 = cfg.get_double("profit", "k2", inst.k2);
        inst.theta_min = cfg.get_double("profit", "theta_min", inst.theta_min);
        out.model = inst.make_model();
        out.spec = inst.make_profit();
        return out;
    }

    if (out.kind == "custom-polynomial") {
        // Dynamics as in the benchmark family; profit is a positive
        // combination of fractional powers: pi(x, theta) =
        // (theta^-gamma + kappa_star) * sum_m c_m x^(e_m), e_m in (0,1).
        const auto delta = cfg.get_list("model", "delta");
        const auto sigma = cfg.get_list("model", "sigma");
        BenchmarkInstance dyn;
        dyn.delta = delta;
        dyn.sigma = sigma;
        dyn.rate_matrix = cfg.get_matrix("chain", "q");
        out.model = dyn.make_model();

        const auto coeffs = cfg.get_list("profit", "coeffs");
        const auto exponents = cfg.get_list("profit", "exponents");
        if (coeffs.empty() || coeffs.size() != exponents.size())
            throw DomainError("custom-polynomial: coeffs and exponents must match");
        for (double c : coeffs)
            if (c <= 0.0) throw DomainError("custom-polynomial: coefficients must be positive");
        double beta_max = 0.0;
        for (double e : exponents) {
            if (!(e > 0.0 && e < 1.0))
                throw DomainError("custom-polynomial: exponents must lie in (0,1)");
            beta_max = std::max(beta_max, e);
        }
        const double gamma = cfg.get_double("profit", "gamma", 1.5);
        const double ks = cfg.get_double("model", "kappa_star", 1.0);
        if (gamma <= 0.0) throw DomainError("custom-polynomial: gamma must be positive");

        ProfitSpec s;
        s.profit = [coeffs, exponents, gamma, ks](double x, double theta) {
            double base = 0.0;
            for (size_t m = 0; m < coeffs.size(); ++m) base += coeffs[m] * std::pow(x, exponents[m]);
            return base * (std::pow(theta, -gamma) + ks);
        };
        s.profit_x = [coeffs, exponents, gamma, ks](double x, double theta) {
            double slope = 0.0;
            for (size_t m = 0; m < coeffs.size(); ++m)
                slope += coeffs[m] * exponents[m] * std::pow(x, exponents[m] - 1.0);
            return slope * (std::pow(theta, -gamma) + ks);
        };
        s.kappa_limit = [coeffs, exponents, ks](double x) {
            double slope = 0.0;
            for (size_t m = 0; m < coeffs.size(); ++m)
                slope += coeffs[m] * exponents[m] * std::pow(x, exponents[m] - 1.0);
            return ks * slope;
        };
        s.k1 = cfg.get_double("profit", "k1", 1.0);
        s.k2 = cfg.get_double("profit", "k2", 0.5);
        s.theta_min = cfg.get_double("profit", "theta_min", 0.05);
        s.growth_beta = beta_max;
        const double bm = beta_max;
        s.F_map = [bm](double x) { return std::pow(x, 1.0 / bm); };
        s.f_map = [bm](double x) { return std::pow(x, bm); };
        out.spec = std::move(s);
        return out;
    }

    throw DomainError("unknown model kind: " + out.kind);
}

CsvWriter::CsvWriter(const std::string& path, const std::string& hash_hex,
                     const std::vector<std::string>& columns) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DomainError("cannot open output file: " + path);
    file_ = f;
    std::fprintf(f, "# config_hash=%s\n", hash_hex.c_str());
    for (size_t i = 0; i < columns.size(); ++i)
        std::fprintf(f, "%s%s", columns[i].c_str(), i + 1 < columns.size() ? "," : "\n");
}

CsvWriter::~CsvWriter() {
    if (file_) std::fclose(static_cast<FILE*>(file_));
}

void CsvWriter::row(const std::vector<double>& values) {
    FILE* f = static_cast<FILE*>(file_);
    for (size_t i = 0; i < values.size(); ++i)
        std::fprintf(f, "%.17g%s", values[i], i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::raw_row(const std::string& line) {
    std::fprintf(static_cast<FILE*>(file_), "%s\n", line.c_str());
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string dynkin_summary_json(const DynkinSolution& sol, const std::string& hash_hex) {
    json j;
    j["config_hash"] = hash_hex;
    j["theta"] = sol.theta;
    j["alpha"] = sol.alpha;
    j["beta"] = sol.beta;
    j["lam"] = sol.lam;
    j["lam_bar"] = sol.lam_bar;
    j["K"] = sol.K;
    j["residual"] = sol.residual;
    j["sweeps"] = sol.sweeps;
    j["grid"] = {{"x_lo", sol.grid.x_lo}, {"x_hi", sol.grid.x_hi}, {"n", sol.grid.n}};
    return j.dump(2) + "\n";
}

std::string stationary_summary_json(const StationaryCDF& law, double moment, double clamped,
                                    const std::string& hash_hex) {
    json j;
    j["config_hash"] = hash_hex;
    j["interaction_moment"] = moment;
    j["clamped_mass"] = clamped;
    j["p"] = law.p;
    j["alpha"] = law.alpha;
    j["beta"] = law.beta;
    j["snap_error"] = law.snap_error;
    j["residual"] = law.residual;
    j["grid"] = {{"x_lo", law.grid.x_lo}, {"x_hi", law.grid.x_hi}, {"n", law.grid.n}};
    return j.dump(2) + "\n";
}

std::string equilibrium_summary_json(const EquilibriumResult& res, const std::string& hash_hex) {
    json j;
    j["config_hash"] = hash_hex;
    j["theta_star"] = res.theta_star;
    j["bracket"] = {res.bracket.first, res.bracket.second};
    j["khat"] = {res.khat.first, res.khat.second};
    j["alpha_star"] = res.solution_at_star.alpha;
    j["beta_star"] = res.solution_at_star.beta;
    j["lam_star"] = res.solution_at_star.lam;
    j["lam_bar_star"] = res.solution_at_star.lam_bar;
    j["residual_at_star"] = res.solution_at_star.residual;
    j["law_residual_at_star"] = res.law_at_star.residual;
    j["bisection_steps"] = res.bisection_steps;
    j["used_damped_fallback"] = res.used_damped_fallback;
    j["warnings"] = res.warnings;
    j["n_map_evaluations"] = res.trace.size();
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open output file: " + path);
    out << content;
}

}  // namespace rsmfg
