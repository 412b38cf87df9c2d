#include "apfold/app/config.hpp"

#include "apfold/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace apfold::app {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lowercase(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Section and key positions, recovered by a line scan since the property
/// tree does not keep them.
class LineIndex {
public:
    explicit LineIndex(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            const std::string s = trim(line);
            if (s.empty() || s[0] == ';') continue;
            if (s.front() == '[' && s.back() == ']') {
                section = trim(s.substr(1, s.size() - 2));
                sections_.emplace(section, number);
                continue;
            }
            const auto eq = s.find('=');
            if (eq != std::string::npos) keys_.emplace(section + "." + trim(s.substr(0, eq)), number);
        }
    }

    int section(const std::string& name) const {
        const auto it = sections_.find(name);
        return it == sections_.end() ? 0 : it->second;
    }
    int key(const std::string& section, const std::string& key) const {
        const auto it = keys_.find(section + "." + key);
        return it == keys_.end() ? this->section(section) : it->second;
    }

private:
    std::map<std::string, int> sections_;
    std::map<std::string, int> keys_;
};

class Reader {
public:
    Reader(const pt::ptree& tree, const LineIndex& index, std::string source)
        : tree_(tree), index_(index), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
        std::ostringstream msg;
        msg << source_ << ":" << index_.key(section, key) << ": [" << section << "] " << key << ": " << what;
        throw Error(ErrorKind::config_error, msg.str());
    }

    bool has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

    void require_section(const std::string& section) const {
        if (!has_section(section)) {
            throw Error(ErrorKind::config_error, source_ + ": missing section [" + section + "]");
        }
    }

    void check_keys(const std::string& section, const std::set<std::string>& allowed) const {
        const auto child = tree_.get_child_optional(section);
        if (!child) return;
        for (const auto& [key, node] : *child) {
            if (!node.empty()) fail(section, key, "nested keys are not supported");
            if (!allowed.count(key)) fail(section, key, "unknown key");
        }
    }

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        const auto child = tree_.get_child_optional(section);
        if (!child) return std::nullopt;
        const auto v = child->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
        return raw(section, key).value_or(fallback);
    }

    double number(const std::string& section, const std::string& key, double fallback) const {
        const auto v = raw(section, key);
        if (!v) return fallback;
        return to_number(section, key, *v);
    }

    double positive(const std::string& section, const std::string& key, double fallback) const {
        const double x = number(section, key, fallback);
        if (!(x > 0.0)) fail(section, key, "must be positive");
        return x;
    }

    long long integer(const std::string& section, const std::string& key, long long fallback) const {
        const auto v = raw(section, key);
        if (!v) return fallback;
        errno = 0;
        char* end = nullptr;
        const long long x = std::strtoll(v->c_str(), &end, 10);
        if (v->empty() || *end != '\0' || errno != 0) fail(section, key, "expected an integer, got '" + *v + "'");
        return x;
    }

    bool boolean(const std::string& section, const std::string& key, bool fallback) const {
        const auto v = raw(section, key);
        if (!v) return fallback;
        const std::string s = lowercase(*v);
        if (s == "true" || s == "yes" || s == "1") return true;
        if (s == "false" || s == "no" || s == "0") return false;
        fail(section, key, "expected true or false, got '" + *v + "'");
    }

    std::vector<double> list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        const auto v = raw(section, key);
        if (!v) return out;
        std::string s = *v;
        for (auto& c : s) {
            if (c == ',') c = ' ';
        }
        std::istringstream in(s);
        std::string item;
        while (in >> item) out.push_back(to_number(section, key, item));
        return out;
    }

    /// "0.5 lambda1", "0.5*lambda1", "lambda1" or a plain number.
    SlopeValue slope(const std::string& section, const std::string& key, SlopeValue fallback) const {
        const auto v = raw(section, key);
        if (!v) return fallback;
        std::string s = *v;
        const auto pos = s.find("lambda1");
        if (pos == std::string::npos) return {to_number(section, key, s), false};
        if (trim(s.substr(pos + 7)) != "") fail(section, key, "unexpected text after lambda1");
        s = trim(s.substr(0, pos));
        if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
        return {s.empty() ? 1.0 : to_number(section, key, s), true};
    }

private:
    double to_number(const std::string& section, const std::string& key, const std::string& s) const {
        errno = 0;
        char* end = nullptr;
        const double x = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
            fail(section, key, "expected a number, got '" + s + "'");
        }
        return x;
    }

    const pt::ptree& tree_;
    const LineIndex& index_;
    std::string source_;
};

WeightSpec read_weight(const Reader& in) {
    const std::string s = "weight";
    in.require_section(s);
    in.check_keys(s, {"preset", "power", "rate", "value", "radii", "values", "tail_power"});
    const std::string preset = in.text(s, "preset", "");
    if (preset == "rational_decay") return WeightSpec::rational_decay(in.positive(s, "power", 3.0));
    if (preset == "exponential") return WeightSpec::exponential(in.positive(s, "rate", 1.0));
    if (preset == "constant") return WeightSpec::constant(in.positive(s, "value", 1.0));
    if (preset == "table") {
        auto radii = in.list(s, "radii");
        auto values = in.list(s, "values");
        if (radii.size() < 2 || radii.size() != values.size()) {
            in.fail(s, "values", "table needs at least two knots and as many values as radii");
        }
        try {
            return WeightSpec::table(std::move(radii), std::move(values), in.positive(s, "tail_power", 4.0));
        } catch (const Error& e) {
            in.fail(s, "radii", e.what());
        }
    }
    in.fail(s, "preset", "unknown weight preset '" + preset + "'");
}

NonlinearityConfig read_nonlinearity(const Reader& in) {
    const std::string s = "nonlinearity";
    in.require_section(s);
    in.check_keys(s, {"preset", "mu_lower", "mu_upper", "offset", "slope", "intercept", "sample_lo", "sample_hi",
                      "samples"});
    NonlinearityConfig c;
    const std::string preset = in.text(s, "preset", "");
    if (preset == "softplus") {
        c.preset = NonlinearityPreset::softplus;
        c.mu_lower = in.slope(s, "mu_lower", c.mu_lower);
        c.mu_upper = in.slope(s, "mu_upper", c.mu_upper);
        c.offset = in.number(s, "offset", c.offset);
        if (c.mu_lower.relative_to_lambda1 == c.mu_upper.relative_to_lambda1 &&
            !(c.mu_lower.value < c.mu_upper.value)) {
            in.fail(s, "mu_upper", "must exceed mu_lower");
        }
    } else if (preset == "linear") {
        c.preset = NonlinearityPreset::linear;
        c.mu_lower = in.slope(s, "slope", {0.0, false});
        c.mu_upper = c.mu_lower;
        c.offset = in.number(s, "intercept", 0.0);
    } else if (preset == "zero") {
        c.preset = NonlinearityPreset::zero;
        c.mu_lower = {0.0, false};
        c.mu_upper = {0.0, false};
        c.offset = 0.0;
    } else {
        in.fail(s, "preset", "unknown nonlinearity preset '" + preset + "'");
    }
    c.sample_lo = in.number(s, "sample_lo", c.sample_lo);
    c.sample_hi = in.number(s, "sample_hi", c.sample_hi);
    if (!(c.sample_lo <= -50.0 && c.sample_hi >= 50.0)) in.fail(s, "sample_lo", "sample range must cover [-50, 50]");
    const long long n = in.integer(s, "samples", static_cast<long long>(c.samples));
    if (n < 3) in.fail(s, "samples", "must be at least 3");
    c.samples = static_cast<std::size_t>(n);
    return c;
}

ForcingSpec read_forcing(const Reader& in) {
    const std::string s = "forcing";
    in.require_section(s);
    in.check_keys(s, {"t", "profile", "amplitude", "width", "radii", "values"});
    ForcingSpec f;
    f.t = in.number(s, "t", 0.0);
    const std::string profile = in.text(s, "profile", "zero");
    if (profile == "zero") {
        f.profile = ForcingProfile::zero;
    } else if (profile == "gaussian") {
        f.profile = ForcingProfile::gaussian;
        f.amplitude = in.number(s, "amplitude", 0.0);
        f.width = in.positive(s, "width", 1.0);
    } else if (profile == "table") {
        f.profile = ForcingProfile::table;
        f.radii = in.list(s, "radii");
        f.values = in.list(s, "values");
        if (f.radii.size() < 2 || f.radii.size() != f.values.size()) {
            in.fail(s, "values", "table needs at least two knots and as many values as radii");
        }
        for (std::size_t k = 1; k < f.radii.size(); ++k) {
            if (!(f.radii[k] > f.radii[k - 1])) in.fail(s, "radii", "knots must be strictly increasing");
        }
    } else {
        in.fail(s, "profile", "unknown forcing profile '" + profile + "'");
    }
    return f;
}

GridConfig read_grid(const Reader& in) {
    const std::string s = "grid";
    in.require_section(s);
    in.check_keys(s, {"dim", "radius", "nodes", "stretch", "farfield"});
    GridConfig g;
    const long long dim = in.integer(s, "dim", g.dim);
    if (dim < 3) in.fail(s, "dim", "must be at least 3");
    g.dim = static_cast<int>(dim);
    g.radius = in.positive(s, "radius", g.radius);
    const long long nodes = in.integer(s, "nodes", static_cast<long long>(g.nodes));
    if (nodes < 3) in.fail(s, "nodes", "must be at least 3");
    g.nodes = static_cast<std::size_t>(nodes);
    g.stretch = in.number(s, "stretch", g.stretch);
    if (!(g.stretch >= 1.0)) in.fail(s, "stretch", "must be at least 1");
    const std::string ff = in.text(s, "farfield", "robin_decay");
    if (ff == "robin_decay") {
        g.farfield = FarField::robin_decay;
    } else if (ff == "dirichlet") {
        g.farfield = FarField::dirichlet;
    } else {
        in.fail(s, "farfield", "expected robin_decay or dirichlet, got '" + ff + "'");
    }
    return g;
}

EigenOptions read_eigen(const Reader& in) {
    const std::string s = "eigen";
    in.check_keys(s, {"tol", "maxit", "compute_gap", "window_lo", "window_hi"});
    EigenOptions e;
    e.tol = in.positive(s, "tol", e.tol);
    const long long maxit = in.integer(s, "maxit", e.maxit);
    if (maxit < 1) in.fail(s, "maxit", "must be positive");
    e.maxit = static_cast<int>(maxit);
    e.compute_gap = in.boolean(s, "compute_gap", e.compute_gap);
    e.window_lo = in.number(s, "window_lo", e.window_lo);
    e.window_hi = in.number(s, "window_hi", e.window_hi);
    if (!(0.0 < e.window_lo && e.window_lo < e.window_hi && e.window_hi <= 1.0)) {
        in.fail(s, "window_lo", "need 0 < window_lo < window_hi <= 1");
    }
    return e;
}

RunSettings read_run(const Reader& in) {
    const std::string s = "run";
    in.check_keys(s, {"id", "command", "method", "t", "output_dir", "seed", "start_file", "solutions_dir",
                      "newton_tol", "newton_maxit", "picard_tol", "picard_maxit", "monotone_tol", "start_factor",
                      "ds", "ds_max", "continuation_tol", "bisect_dt_min", "super_height", "super_r1", "super_r2",
                      "monotone_gap", "write_profiles", "comparison_samples", "nonexistence_starts"});
    RunSettings r;
    r.id = in.text(s, "id", r.id);
    if (r.id.empty() || r.id.find_first_of("/\\") != std::string::npos) in.fail(s, "id", "must be a plain name");
    r.command = in.text(s, "command", r.command);
    static const std::set<std::string> commands{"check", "eigen", "solve", "branch", "alpha", "two", "verify"};
    if (!commands.count(r.command)) in.fail(s, "command", "unknown command '" + r.command + "'");
    r.method = in.text(s, "method", r.method);
    if (r.method != "monotone" && r.method != "newton" && r.method != "picard") {
        in.fail(s, "method", "expected monotone, newton or picard, got '" + r.method + "'");
    }
    if (in.raw(s, "t")) r.t = in.number(s, "t", 0.0);
    r.output_dir = in.text(s, "output_dir", r.output_dir);
    const long long seed = in.integer(s, "seed", 0);
    if (seed < 0) in.fail(s, "seed", "must be non-negative");
    r.seed = static_cast<std::uint64_t>(seed);
    r.start_file = in.text(s, "start_file", "");
    r.solutions_dir = in.text(s, "solutions_dir", "");
    r.newton_tol = in.positive(s, "newton_tol", r.newton_tol);
    r.newton_maxit = static_cast<int>(in.integer(s, "newton_maxit", r.newton_maxit));
    r.picard_tol = in.positive(s, "picard_tol", r.picard_tol);
    r.picard_maxit = static_cast<int>(in.integer(s, "picard_maxit", r.picard_maxit));
    r.monotone_tol = in.positive(s, "monotone_tol", r.monotone_tol);
    r.start_factor = in.positive(s, "start_factor", r.start_factor);
    r.ds = in.positive(s, "ds", r.ds);
    r.ds_max = in.positive(s, "ds_max", r.ds_max);
    if (r.ds_max < r.ds) in.fail(s, "ds_max", "must be at least ds");
    r.continuation_tol = in.positive(s, "continuation_tol", r.continuation_tol);
    r.bisect_dt_min = in.positive(s, "bisect_dt_min", r.bisect_dt_min);
    r.super_height = in.positive(s, "super_height", r.super_height);
    r.super_r1 = in.positive(s, "super_r1", r.super_r1);
    r.super_r2 = in.positive(s, "super_r2", r.super_r2);
    if (!(r.super_r2 > r.super_r1)) in.fail(s, "super_r2", "must exceed super_r1");
    r.monotone_gap = in.positive(s, "monotone_gap", r.monotone_gap);
    r.write_profiles = in.boolean(s, "write_profiles", r.write_profiles);
    r.comparison_samples = static_cast<int>(in.integer(s, "comparison_samples", r.comparison_samples));
    r.nonexistence_starts = static_cast<int>(in.integer(s, "nonexistence_starts", r.nonexistence_starts));
    for (const char* key : {"newton_maxit", "picard_maxit"}) {
        if (in.integer(s, key, 1) < 1) in.fail(s, key, "must be positive");
    }
    for (const char* key : {"comparison_samples", "nonexistence_starts"}) {
        if (in.integer(s, key, 0) < 0) in.fail(s, key, "must be non-negative");
    }
    return r;
}

std::string slope_text(const SlopeValue& v) {
    return v.relative_to_lambda1 ? fmt(v.value) + " lambda1" : fmt(v.value);
}

std::string list_text(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) out += ", ";
        out += fmt(xs[k]);
    }
    return out;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        std::ostringstream msg;
        msg << source << ":" << e.line() << ": " << e.message();
        throw Error(ErrorKind::config_error, msg.str());
    }
    const LineIndex index(text);
    const Reader reader(tree, index, source);
    static const std::set<std::string> sections{"weight", "nonlinearity", "forcing", "grid", "eigen", "run"};
    for (const auto& [name, node] : tree) {
        if (node.empty()) {
            std::ostringstream msg;
            msg << source << ":" << index.key("", name) << ": key '" << name << "' outside any section";
            throw Error(ErrorKind::config_error, msg.str());
        }
        if (!sections.count(name)) {
            std::ostringstream msg;
            msg << source << ":" << index.section(name) << ": unknown section [" << name << "]";
            throw Error(ErrorKind::config_error, msg.str());
        }
    }
    ScenarioConfig c;
    c.problem.weight = read_weight(reader);
    c.problem.nonlinearity = read_nonlinearity(reader);
    c.problem.forcing = read_forcing(reader);
    c.problem.grid = read_grid(reader);
    c.problem.eigen = read_eigen(reader);
    c.run = read_run(reader);
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

std::string serialize_config(const ScenarioConfig& config) {
    std::ostringstream out;
    const auto& p = config.problem;
    out << "[weight]\n";
    switch (p.weight.preset) {
        case WeightPreset::rational_decay: out << "preset = rational_decay\npower = " << fmt(p.weight.params.at(0)) << "\n"; break;
        case WeightPreset::exponential: out << "preset = exponential\nrate = " << fmt(p.weight.params.at(0)) << "\n"; break;
        case WeightPreset::constant: out << "preset = constant\nvalue = " << fmt(p.weight.params.at(0)) << "\n"; break;
        case WeightPreset::table:
            out << "preset = table\nradii = " << list_text(p.weight.radii) << "\nvalues = " << list_text(p.weight.values)
                << "\ntail_power = " << fmt(p.weight.params.at(0)) << "\n";
            break;
    }

    const auto& g = p.nonlinearity;
    out << "\n[nonlinearity]\n";
    switch (g.preset) {
        case NonlinearityPreset::softplus:
            out << "preset = softplus\nmu_lower = " << slope_text(g.mu_lower) << "\nmu_upper = " << slope_text(g.mu_upper)
                << "\noffset = " << fmt(g.offset) << "\n";
            break;
        case NonlinearityPreset::linear:
            out << "preset = linear\nslope = " << slope_text(g.mu_lower) << "\nintercept = " << fmt(g.offset) << "\n";
            break;
        case NonlinearityPreset::zero: out << "preset = zero\n"; break;
    }
    out << "sample_lo = " << fmt(g.sample_lo) << "\nsample_hi = " << fmt(g.sample_hi) << "\nsamples = " << g.samples
        << "\n";

    const auto& f = p.forcing;
    out << "\n[forcing]\nt = " << fmt(f.t) << "\n";
    switch (f.profile) {
        case ForcingProfile::zero: out << "profile = zero\n"; break;
        case ForcingProfile::gaussian:
            out << "profile = gaussian\namplitude = " << fmt(f.amplitude) << "\nwidth = " << fmt(f.width) << "\n";
            break;
        case ForcingProfile::table:
            out << "profile = table\nradii = " << list_text(f.radii) << "\nvalues = " << list_text(f.values) << "\n";
            break;
    }

    const auto& gr = p.grid;
    out << "\n[grid]\ndim = " << gr.dim << "\nradius = " << fmt(gr.radius) << "\nnodes = " << gr.nodes
        << "\nstretch = " << fmt(gr.stretch) << "\nfarfield = " << to_string(gr.farfield) << "\n";

    const auto& e = p.eigen;
    out << "\n[eigen]\ntol = " << fmt(e.tol) << "\nmaxit = " << e.maxit
        << "\ncompute_gap = " << (e.compute_gap ? "true" : "false") << "\nwindow_lo = " << fmt(e.window_lo)
        << "\nwindow_hi = " << fmt(e.window_hi) << "\n";

    const auto& r = config.run;
    out << "\n[run]\nid = " << r.id << "\ncommand = " << r.command << "\nmethod = " << r.method << "\n";
    if (!std::isnan(r.t)) out << "t = " << fmt(r.t) << "\n";
    out << "output_dir = " << r.output_dir << "\nseed = " << r.seed << "\n";
    if (!r.start_file.empty()) out << "start_file = " << r.start_file << "\n";
    if (!r.solutions_dir.empty()) out << "solutions_dir = " << r.solutions_dir << "\n";
    out << "newton_tol = " << fmt(r.newton_tol) << "\nnewton_maxit = " << r.newton_maxit
        << "\npicard_tol = " << fmt(r.picard_tol) << "\npicard_maxit = " << r.picard_maxit
        << "\nmonotone_tol = " << fmt(r.monotone_tol) << "\nstart_factor = " << fmt(r.start_factor)
        << "\nds = " << fmt(r.ds) << "\nds_max = " << fmt(r.ds_max) << "\ncontinuation_tol = " << fmt(r.continuation_tol)
        << "\nbisect_dt_min = " << fmt(r.bisect_dt_min) << "\nsuper_height = " << fmt(r.super_height)
        << "\nsuper_r1 = " << fmt(r.super_r1) << "\nsuper_r2 = " << fmt(r.super_r2)
        << "\nmonotone_gap = " << fmt(r.monotone_gap) << "\nwrite_profiles = " << (r.write_profiles ? "true" : "false")
        << "\ncomparison_samples = " << r.comparison_samples << "\nnonexistence_starts = " << r.nonexistence_starts
        << "\n";
    return out.str();
}

ScenarioConfig canonical_scenario() {
    ScenarioConfig c;
    c.problem = canonical_config();
    c.run.id = "canonical";
    return c;
}

}  // namespace apfold::app
