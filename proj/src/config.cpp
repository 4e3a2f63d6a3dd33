#include "mfgp/config.hpp"

#include "mfgp/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace mfgp {

namespace {

using json = nlohmann::json;

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

// JSON object with its dotted path; unknown keys are rejected on finish().
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) fail("expected an object");
    }

    const std::string& path() const { return path_; }
    std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + what);
    }
    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        throw ConfigError(sub(key) + ": " + what);
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }
    const json& require(const std::string& key)
    {
        if (!has(key)) fail(key, "required field is missing");
        return raw(key);
    }
    Node child(const std::string& key)
    {
        const json& c = require(key);
        if (!c.is_object()) fail(key, "expected an object");
        return Node(c, sub(key));
    }

    double number(const std::string& key, double def)
    {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_number()) fail(key, "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key)
    {
        require(key);
        return number(key, 0.0);
    }
    int integer(const std::string& key, int def)
    {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_number_integer()) fail(key, "expected an integer");
        return v.get<int>();
    }
    std::string string(const std::string& key, const std::string& def)
    {
        if (!has(key)) return def;
        const json& v = raw(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& key)
    {
        const json& v = raw(key);
        if (!v.is_array()) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number()) fail(key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    // range checks; open ends excluded
    void range(const std::string& key, double v, double lo, double hi, bool lo_open, bool hi_open) const
    {
        bool ok = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
        if (!ok) {
            std::string l = lo_open ? "(" : "[", r = hi_open ? ")" : "]";
            std::string hs = std::isinf(hi) ? "inf" : fmt(hi);
            fail(key, fmt(v) + " is outside " + l + fmt(lo) + ", " + hs + r);
        }
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) fail(it.key(), "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

constexpr double inf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail_at(const std::string& path, const std::string& what)
{
    throw ConfigError(path + ": " + what);
}

// periodic density on the x nodes of g
Slice density(Node& parent, const std::string& key, const Grid& g)
{
    const json& j = parent.require(key);
    const std::string path = parent.sub(key);
    Slice out(g.nx(), 1.0);
    if (j.is_array()) {
        for (const json& e : j)
            if (!e.is_number()) fail_at(path, "expected an array of numbers");
        out = j.get<std::vector<double>>();
    } else {
        Node n(j, path);
        std::string kind = n.string("kind", "values");
        if (kind == "uniform") {
        } else if (kind == "sine") {
            double a = n.number("amplitude");
            n.range("amplitude", a, -1.0, 1.0, true, true);
            int k = n.integer("mode", 1);
            if (k < 1) n.fail("mode", "must be >= 1");
            double ph = n.number("phase", 0.0);
            for (int j2 = 0; j2 < g.nx(); ++j2) out[j2] = 1.0 + a * std::sin(2 * std::numbers::pi * k * g.x(j2) + ph);
        } else if (kind == "values") {
            if (!n.has("values")) n.fail("values", "required field is missing");
            out = n.numbers("values");
        } else {
            n.fail("kind", "unknown density kind '" + kind + "' (uniform, sine, values)");
        }
        n.finish();
    }
    if (static_cast<int>(out.size()) != g.nx())
        fail_at(path, "expected " + std::to_string(g.nx()) + " values, got " + std::to_string(out.size()));
    double mass = 0.0;
    for (std::size_t j2 = 0; j2 < out.size(); ++j2) {
        if (!(out[j2] >= 0.0)) fail_at(path, "negative density at index " + std::to_string(j2));
        mass += out[j2];
    }
    mass *= g.dx();
    if (std::abs(mass - 1.0) > 1e-8) fail_at(path, "total mass " + fmt(mass) + " differs from 1");
    return out;
}

Grid parse_grid(Node& root)
{
    if (!root.has("grid")) return Grid(17, 32, 1.0);
    Node g = root.child("grid");
    int nt = g.integer("nt", 17), nx = g.integer("nx", 32);
    double T = g.number("T", 1.0);
    if (nt < 3) g.fail("nt", "must be >= 3");
    if (nx < 4) g.fail("nx", "must be >= 4");
    g.range("T", T, 0.0, inf, true, true);
    g.finish();
    return Grid(nt, nx, T);
}

PlanningSpec parse_planning(Node& root, const Grid& grid, RunConfig& cfg)
{
    Node p = root.child("planning");
    PlanningSpec s{grid};
    s.order = p.integer("order", 0);
    if (s.order != 0 && s.order != 1) p.fail("order", "must be 0 or 1");

    if (p.has("hamiltonian")) {
        Node h = p.child("hamiltonian");
        std::string kind = h.string("kind", "quadratic");
        if (kind == "quadratic") {
        } else if (kind == "power") {
            double a = h.number("alpha");
            h.range("alpha", a, 1.0, inf, true, true);
            s.hamiltonian = Hamiltonian::power(a);
        } else {
            h.fail("kind", "unknown Hamiltonian '" + kind + "' (quadratic, power)");
        }
        h.finish();
    }
    if (p.has("coupling")) {
        Node c = p.child("coupling");
        std::string kind = c.string("kind", "quadratic");
        if (kind == "quadratic") {
        } else if (kind == "power") {
            double gm = c.number("gamma");
            c.range("gamma", gm, 1.0, inf, false, true);
            s.coupling = Coupling::power(gm);
        } else if (kind == "linear") {
            s.coupling = Coupling::linear();
        } else {
            c.fail("kind", "unknown coupling '" + kind + "' (quadratic, power, linear)");
        }
        c.finish();
    }
    s.potential.assign(grid.nx(), 0.0);
    if (p.has("potential")) {
        const json& v = p.raw("potential");
        if (v.is_array()) {
            for (const json& e : v)
                if (!e.is_number()) p.fail("potential", "expected an array of numbers");
            s.potential = v.get<std::vector<double>>();
        } else {
            Node n(v, p.sub("potential"));
            std::string kind = n.string("kind", "zero");
            if (kind == "zero") {
            } else if (kind == "cosine") {
                double a = n.number("amplitude");
                int k = n.integer("mode", 1);
                if (k < 1) n.fail("mode", "must be >= 1");
                for (int j = 0; j < grid.nx(); ++j) s.potential[j] = a * std::cos(2 * std::numbers::pi * k * grid.x(j));
            } else if (kind == "values") {
                s.potential = n.numbers("values");
            } else {
                n.fail("kind", "unknown potential '" + kind + "' (zero, cosine, values)");
            }
            n.finish();
        }
        if (static_cast<int>(s.potential.size()) != grid.nx())
            p.fail("potential", "expected " + std::to_string(grid.nx()) + " values");
    }
    s.m0 = density(p, "m0", grid);
    s.mT = density(p, "mT", grid);

    if (p.has("optimizer")) {
        Node o = p.child("optimizer");
        s.opt.max_iters = o.integer("max_iters", s.opt.max_iters);
        if (s.opt.max_iters < 1) o.fail("max_iters", "must be >= 1");
        s.opt.tolerance = o.number("tolerance", s.opt.tolerance);
        o.range("tolerance", s.opt.tolerance, 0.0, inf, true, true);
        s.opt.delta_floor = o.number("delta_floor", s.opt.delta_floor);
        o.range("delta_floor", s.opt.delta_floor, 0.0, inf, false, true);
        s.opt.armijo = o.number("armijo", s.opt.armijo);
        o.range("armijo", s.opt.armijo, 0.0, 1.0, true, true);
        s.opt.backtrack = o.number("backtrack", s.opt.backtrack);
        o.range("backtrack", s.opt.backtrack, 0.0, 1.0, true, true);
        s.opt.max_backtracks = o.integer("max_backtracks", s.opt.max_backtracks);
        if (s.opt.max_backtracks < 1) o.fail("max_backtracks", "must be >= 1");
        o.finish();
    }
    if (p.has("start")) {
        Node st = p.child("start");
        std::string kind = st.string("kind", "interpolant");
        if (kind == "interpolant") {
            cfg.start = StartKind::interpolant;
        } else if (kind == "random") {
            cfg.start = StartKind::random;
            cfg.start_scale = st.number("scale", 1.0);
            st.range("scale", cfg.start_scale, 0.0, 1.0, true, false);
        } else {
            st.fail("kind", "unknown start '" + kind + "' (interpolant, random)");
        }
        st.finish();
    }
    p.finish();
    double k0 = std::min(*std::min_element(s.m0.begin(), s.m0.end()), *std::min_element(s.mT.begin(), s.mT.end()));
    if (cfg.mode == Mode::planning && !(s.opt.delta_floor < k0))
        p.fail("optimizer.delta_floor", "must be below min(m0, mT) = " + fmt(k0));
    return s;
}

CongestionSpec parse_congestion(Node& root, const Grid& grid, RunConfig& cfg)
{
    Node c = root.child("congestion");
    CongestionSpec s{grid};
    s.alpha = c.number("alpha", s.alpha);
    c.range("alpha", s.alpha, 0.0, 2.0, true, true);
    s.mu = c.number("mu", s.mu);
    c.range("mu", s.mu, 0.0, inf, true, true);
    if (!(s.alpha < s.mu + 1.0)) c.fail("alpha", "must be < mu + 1 = " + fmt(s.mu + 1.0));
    s.m0 = density(c, "m0", grid);
    s.mT = density(c, "mT", grid);
    if (c.has("eps_schedule")) {
        s.eps_schedule = c.numbers("eps_schedule");
        double prev = inf;
        for (double e : s.eps_schedule) {
            if (!(e > 0.0 && e < prev)) c.fail("eps_schedule", "must be positive and strictly decreasing");
            prev = e;
        }
        if (cfg.mode == Mode::congestion && !s.eps_schedule.empty() && s.eps_schedule.front() > s.k0())
            c.fail("eps_schedule", "first level exceeds k0 = " + fmt(s.k0()));
    }
    s.eps_min = c.number("eps_min", s.eps_min);
    c.range("eps_min", s.eps_min, 0.0, inf, true, true);
    s.eps_factor = c.number("eps_factor", s.eps_factor);
    c.range("eps_factor", s.eps_factor, 0.0, 1.0, true, true);
    s.damping = c.number("damping", s.damping);
    c.range("damping", s.damping, 0.0, 1.0, true, false);
    std::string method = c.string("method", "newton");
    if (method == "newton") s.method = OuterMethod::newton;
    else if (method == "picard") s.method = OuterMethod::picard;
    else c.fail("method", "unknown method '" + method + "' (newton, picard)");
    s.max_outer = c.integer("max_outer", s.max_outer);
    if (s.max_outer < 1) c.fail("max_outer", "must be >= 1");
    s.tol_fp = c.number("tol_fp", s.tol_fp);
    c.range("tol_fp", s.tol_fp, 0.0, inf, true, true);
    s.stagnation_window = c.integer("stagnation_window", s.stagnation_window);
    if (s.stagnation_window < 1) c.fail("stagnation_window", "must be >= 1");
    s.inner_max_iters = c.integer("inner_max_iters", s.inner_max_iters);
    if (s.inner_max_iters < 1) c.fail("inner_max_iters", "must be >= 1");
    s.inner_tol = c.number("inner_tol", s.inner_tol);
    c.range("inner_tol", s.inner_tol, 0.0, inf, true, true);
    cfg.certificate_tests = c.integer("certificate_tests", cfg.certificate_tests);
    if (cfg.certificate_tests < 0) c.fail("certificate_tests", "must be >= 0");
    c.finish();
    return s;
}

HughesSpec parse_hughes(Node& root)
{
    Node h = root.child("hughes");
    HughesSpec s;
    s.x_min = h.number("x_min", s.x_min);
    s.x_max = h.number("x_max", s.x_max);
    if (!(s.x_max > s.x_min)) h.fail("x_max", "must exceed x_min");
    int n = h.integer("n", 201);
    if (n < 3) h.fail("n", "must be >= 3");
    std::string law = h.string("law", "linear");
    if (law == "linear") s.law = SpeedLaw::linear;
    else if (law == "congestion") s.law = SpeedLaw::congestion;
    else h.fail("law", "unknown speed law '" + law + "' (linear, congestion)");
    s.k1 = h.number("k1", s.k1);
    h.range("k1", s.k1, 0.0, inf, true, true);
    s.k2 = h.number("k2", s.k2);
    h.range("k2", s.k2, 0.0, inf, true, true);
    s.beta = h.number("beta", s.beta);
    h.range("beta", s.beta, 0.0, 0.5, true, true);
    std::string branch = h.string("branch", "increasing");
    if (branch == "increasing") s.branch = Branch::increasing;
    else if (branch == "decreasing") s.branch = Branch::decreasing;
    else h.fail("branch", "unknown branch '" + branch + "' (increasing, decreasing)");
    s.t_final = h.number("t_final", s.t_final);
    h.range("t_final", s.t_final, 0.0, inf, true, true);
    s.nt = h.integer("nt", s.nt);
    if (s.nt < 2) h.fail("nt", "must be >= 2");
    s.search_margin = h.number("search_margin", s.search_margin);
    s.refine_iters = h.integer("refine_iters", s.refine_iters);
    if (s.refine_iters < 0) h.fail("refine_iters", "must be >= 0");

    const json& r = h.require("rho0");
    s.rho0.assign(n, 0.0);
    auto x = [&](int j) { return s.x_min + j * (s.x_max - s.x_min) / (n - 1); };
    if (r.is_array()) {
        for (const json& e : r)
            if (!e.is_number()) h.fail("rho0", "expected an array of numbers");
        s.rho0 = r.get<std::vector<double>>();
        if (static_cast<int>(s.rho0.size()) != n) h.fail("rho0", "expected n = " + std::to_string(n) + " values");
    } else {
        Node d(r, h.sub("rho0"));
        std::string kind = d.string("kind", "constant");
        if (kind == "constant") {
            double v = d.number("value");
            for (double& e : s.rho0) e = v;
        } else if (kind == "tanh") {
            double base = d.number("base"), amp = d.number("amplitude"), width = d.number("width", 1.0),
                   center = d.number("center", 0.0);
            d.range("width", width, 0.0, inf, true, true);
            for (int j = 0; j < n; ++j) s.rho0[j] = base + amp * std::tanh((x(j) - center) / width);
        } else if (kind == "step") {
            double left = d.number("left"), right = d.number("right"), at = d.number("at", 0.0);
            for (int j = 0; j < n; ++j) s.rho0[j] = x(j) >= at ? right : left;
        } else {
            d.fail("kind", "unknown rho0 kind '" + kind + "' (constant, tanh, step)");
        }
        d.finish();
    }
    h.finish();
    try {
        validate_spec(s);
    } catch (const Error& e) {
        h.fail(e.what());
    }
    return s;
}

std::string position(const std::string& text, std::size_t byte)
{
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

const char* mode_name(Mode m)
{
    switch (m) {
    case Mode::planning: return "planning";
    case Mode::congestion: return "congestion";
    case Mode::hughes: return "hughes";
    case Mode::validate: return "validate";
    }
    return "?";
}

RunConfig parse_config_string(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        auto p = msg.find("]: ");
        throw ConfigError("config: syntax error at " + position(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                          (p == std::string::npos ? msg : msg.substr(p + 3)));
    }
    Node root(j, "");
    RunConfig cfg;
    if (!root.has("schema_version")) root.fail("schema_version", "required field is missing");
    int version = root.integer("schema_version", 0);
    if (version != schema_version)
        root.fail("schema_version", "unsupported version " + std::to_string(version) + " (expected 1)");
    std::string mode = root.string("mode", "");
    if (mode == "planning") cfg.mode = Mode::planning;
    else if (mode == "congestion") cfg.mode = Mode::congestion;
    else if (mode == "hughes") cfg.mode = Mode::hughes;
    else if (mode == "validate") cfg.mode = Mode::validate;
    else root.fail("mode", "expected one of planning, congestion, hughes, validate");
    double seed = root.number("seed", 0.0);
    if (seed < 0 || seed != std::floor(seed)) root.fail("seed", "must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.output = root.string("output", cfg.output);

    const char* blocks[] = {"planning", "congestion", "hughes"};
    const char* wanted = cfg.mode == Mode::validate ? (root.has("congestion") ? "congestion" : "planning")
                                                    : mode_name(cfg.mode);
    for (const char* b : blocks)
        if (root.has(b) && std::string(b) != wanted)
            root.fail(b, std::string("block not allowed in mode '") + mode + "'");
    if (!root.has(wanted)) root.fail(wanted, "required block is missing");

    if (cfg.mode == Mode::hughes) {
        if (root.has("grid")) root.fail("grid", "not used in mode 'hughes' (the window lives in the hughes block)");
        cfg.hughes = parse_hughes(root);
    } else {
        Grid grid = parse_grid(root);
        if (std::string(wanted) == "planning") {
            PlanningSpec s = parse_planning(root, grid, cfg);
            if (cfg.mode == Mode::planning) {
                try {
                    validate_spec(s);
                } catch (const DomainError& e) {
                    root.fail("planning", e.what());
                } catch (const ShapeError& e) {
                    root.fail("planning", e.what());
                }
            }
            cfg.planning = std::move(s);
        } else {
            CongestionSpec s = parse_congestion(root, grid, cfg);
            if (cfg.mode == Mode::congestion) {
                try {
                    validate_spec(s);
                } catch (const DomainError& e) {
                    root.fail("congestion", e.what());
                }
            }
            cfg.congestion = std::move(s);
        }
    }
    root.finish();
    return cfg;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_string(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace mfgp
