#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/uuid/detail/sha1.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <type_traits>
#include <sstream>

namespace vfp::cli {

namespace pt = boost::property_tree;

ModelParams RunConfig::params() const { return derived_constants(m, gamma, kB_TB); }

namespace {

Potential make_potential(const std::string& kind, double a, double b, const char* field) {
    if (kind == "zero") return Potential::zero();
    if (kind == "quadratic") return Potential::quadratic(a);
    if (kind == "quartic") return Potential::quartic_double_well(a, b);
    if (kind == "gaussian") return Potential::gaussian_kernel(a, b);
    throw ConfigError(std::string("[potential] ") + field + ": unknown kind '" + kind +
                      "' (zero, quadratic, quartic, gaussian)");
}

}  // namespace

PotentialSpec RunConfig::spec() const {
    Potential U = make_potential(U_kind, U_a, U_b, "U");
    Potential K = make_potential(K_kind, K_a, K_b, "K");
    double kU = 0.0;
    if (kappa_U) kU = *kappa_U;
    else if (U_kind == "quadratic") kU = 0.5 * U_a;  // a x^2/2 >= (a/2) x^2
    return PotentialSpec::make(U, K, kU);
}

SimConfig RunConfig::sim() const {
    SimConfig c;
    c.N = N;
    c.dt = particle_dt;
    c.t_end = particle_t_end;
    c.seed = seed;
    c.record_every = particle_record_every;
    c.init = init;
    return c;
}

namespace {

struct Reader {
    const pt::ptree& tree;
    std::set<std::string> used;

    const pt::ptree* section(const std::string& name) const {
        auto it = tree.find(name);
        return it == tree.not_found() ? nullptr : &it->second;
    }
    std::optional<std::string> raw(const std::string& sec, const std::string& key) {
        used.insert(sec + "." + key);
        const pt::ptree* s = section(sec);
        if (!s) return std::nullopt;
        auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        return v ? std::optional<std::string>(*v) : std::nullopt;
    }
    [[noreturn]] static void bad(const std::string& sec, const std::string& key, const std::string& what) {
        throw ConfigError("[" + sec + "] " + key + ": " + what);
    }
    template <class T>
    static T number(const std::string& sec, const std::string& key, const std::string& s) {
        T out{};
        const char* b = s.data();
        const char* e = b + s.size();
        auto r = std::from_chars(b, e, out);
        if (r.ec != std::errc() || r.ptr != e) bad(sec, key, "cannot parse '" + s + "'");
        return out;
    }
    template <class T>
    void opt(const std::string& sec, const std::string& key, T& dst) {
        auto s = raw(sec, key);
        if (!s) return;
        if constexpr (std::is_same_v<T, std::string>) dst = *s;
        else dst = number<T>(sec, key, *s);
    }
    template <class T>
    void req(const std::string& sec, const std::string& key, T& dst) {
        if (!raw(sec, key)) bad(sec, key, "required field missing");
        opt(sec, key, dst);
    }
};

std::string strip_hash_comments(const std::string& text) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        auto p = line.find_first_not_of(" \t");
        out << (p != std::string::npos && line[p] == '#' ? "" : line) << '\n';
    }
    return out.str();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(strip_hash_comments(text));
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
    }
    Reader r{tree, {}};
    RunConfig c;
    r.req("params", "m", c.m);
    r.req("params", "gamma", c.gamma);
    r.req("params", "kB_TB", c.kB_TB);
    r.opt("potential", "U", c.U_kind);
    r.opt("potential", "U_a", c.U_a);
    r.opt("potential", "U_b", c.U_b);
    r.opt("potential", "K", c.K_kind);
    r.opt("potential", "K_a", c.K_a);
    r.opt("potential", "K_b", c.K_b);
    if (auto s = r.raw("potential", "kappa_U")) c.kappa_U = Reader::number<double>("potential", "kappa_U", *s);
    r.opt("init", "mean_x", c.init.mean_x);
    r.opt("init", "mean_v", c.init.mean_v);
    r.opt("init", "sx", c.init.sx);
    r.opt("init", "sv", c.init.sv);
    r.opt("grid", "x_min", c.grid.x_min);
    r.opt("grid", "x_max", c.grid.x_max);
    r.opt("grid", "v_min", c.grid.v_min);
    r.opt("grid", "v_max", c.grid.v_max);
    r.opt("grid", "nx", c.grid.nx);
    r.opt("grid", "nv", c.grid.nv);
    r.opt("particles", "N", c.N);
    r.opt("particles", "dt", c.particle_dt);
    r.opt("particles", "t_end", c.particle_t_end);
    r.opt("particles", "record_every", c.particle_record_every);
    r.opt("particles", "csv_particles", c.csv_particles);
    r.opt("pde", "dt", c.pde_dt);
    r.opt("pde", "t_end", c.pde_t_end);
    r.opt("pde", "record_every", c.pde_record_every);
    r.opt("flow", "dt", c.flow_dt);
    r.opt("hwi", "gaussian_pairs", c.hwi_gaussian_pairs);
    r.opt("hwi", "perturbed_pairs", c.hwi_perturbed_pairs);
    r.opt("hwi", "M", c.hwi_M);
    r.opt("stationary", "damping", c.gibbs_damping);
    r.opt("stationary", "tol", c.gibbs_tol);
    r.opt("stationary", "max_iter", c.gibbs_max_iter);
    r.opt("run", "seed", c.seed);

    for (const auto& [sec, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + sec + "' outside any section");
        for (const auto& [key, val] : body)
            if (!r.used.count(sec + "." + key)) Reader::bad(sec, key, "unknown field");
    }

    if (!(c.m > 0.0)) Reader::bad("params", "m", "must be positive");
    if (!(c.gamma >= 0.0)) Reader::bad("params", "gamma", "must be nonnegative");
    if (!(c.kB_TB > 0.0)) Reader::bad("params", "kB_TB", "must be positive");
    if (!(c.init.sx > 0.0)) Reader::bad("init", "sx", "must be positive");
    if (!(c.init.sv > 0.0)) Reader::bad("init", "sv", "must be positive");
    if (c.grid.nx < 4 || c.grid.nv < 4) Reader::bad("grid", "nx", "nx and nv must be at least 4");
    if (!(c.grid.x_max > c.grid.x_min)) Reader::bad("grid", "x_max", "must exceed x_min");
    if (!(c.grid.v_max > c.grid.v_min)) Reader::bad("grid", "v_max", "must exceed v_min");
    if (c.N < 4) Reader::bad("particles", "N", "must be at least 4");
    if (!(c.particle_dt > 0.0)) Reader::bad("particles", "dt", "must be positive");
    if (!(c.pde_dt > 0.0)) Reader::bad("pde", "dt", "must be positive");
    if (!(c.flow_dt > 0.0)) Reader::bad("flow", "dt", "must be positive");
    if (c.particle_record_every < 1) Reader::bad("particles", "record_every", "must be at least 1");
    if (c.pde_record_every < 1) Reader::bad("pde", "record_every", "must be at least 1");
    if (!(c.hwi_M > 0.0)) Reader::bad("hwi", "M", "must be positive");
    c.spec();  // rejects unknown potential kinds
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::uint64_t resolve_seed(const RunConfig& cfg, std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("VFP_SEED")) {
        std::uint64_t s = 0;
        const char* e = env + std::char_traits<char>::length(env);
        auto r = std::from_chars(env, e, s);
        if (r.ec != std::errc() || r.ptr != e) throw ConfigError(std::string("VFP_SEED: cannot parse '") + env + "'");
        return s;
    }
    return cfg.seed;
}

std::string sha1_hex(const std::string& bytes) {
    boost::uuids::detail::sha1 h;
    h.process_bytes(bytes.data(), bytes.size());
    unsigned int d[5];
    h.get_digest(d);
    char buf[41];
    for (int i = 0; i < 5; ++i) std::snprintf(buf + 8 * i, 9, "%08x", d[i]);
    return std::string(buf, 40);
}

}  // namespace vfp::cli
