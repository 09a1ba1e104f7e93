#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "hamext/catalog.hpp"

namespace hamext::cli {

namespace {

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string id;
    int m = 0;
    std::string params;
    std::string L0;
    std::string kappa;
    std::string constraint;
    std::string G;
    std::uint64_t seed = 20120;
    std::string json_path;
};

void add_common(CLI::App *cmd, Options &o)
{
    cmd->add_option("id", o.id, "catalog id")->required();
    cmd->add_option("-m", o.m, "extension order")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--params", o.params, "parameter values, name=value,...");
    cmd->add_option("--L0", o.L0, "value of L0");
    cmd->add_option("--kappa", o.kappa, "kappa for the curved branch");
    cmd->add_option("--constraint", o.constraint, "impose a named table constraint");
    cmd->add_option("--G", o.G, "use this G instead of the nullspace");
    cmd->add_option("--seed", o.seed, "seed for every random draw");
}

Number parse_number(const std::string &text)
{
    try {
        const Expr e = normalize(parse_expr(text, {}));
        if (e.is_number()) {
            return e.number();
        }
        return Number::inexact(eval(e, {}));
    } catch (const std::exception &ex) {
        throw UsageError(fmt::format("'{}' is not a number: {}", text, ex.what()));
    }
}

ParamValues parse_params(const std::string &text)
{
    ParamValues out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        const std::string item = text.substr(start, end - start);
        start = end + 1;
        if (item.find_first_not_of(' ') == std::string::npos) {
            continue;
        }
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw UsageError(fmt::format("expected name=value, got '{}'", item));
        }
        auto name = item.substr(0, eq);
        name.erase(std::remove(name.begin(), name.end(), ' '), name.end());
        out[name] = parse_number(item.substr(eq + 1));
    }
    return out;
}

Catalog open_catalog()
{
    const std::string path = default_catalog_path();
    try {
        return load_catalog(path);
    } catch (const std::ios_base::failure &e) {
        throw IoError(e.what());
    } catch (const CatalogError &e) {
        throw IoError(fmt::format("{}: {}", path, e.what()));
    } catch (const SelfValidationError &e) {
        throw IoError(fmt::format("{}: {}", path, e.what()));
    }
}

void write_file(const std::string &path, const std::string &text)
{
    std::ofstream f(path);
    if (!f || !(f << text) || !(f << '\n')) {
        throw IoError(fmt::format("cannot write '{}'", path));
    }
}

std::string format_values(const ParamValues &v)
{
    std::string s;
    for (const auto &[k, x] : v) {
        s += fmt::format("{}{}={}", s.empty() ? "" : ", ", k, x.to_string());
    }
    return s;
}

struct Prepared {
    std::unique_ptr<Catalog> catalog;
    const SystemEntry *entry = nullptr;
    Instance inst;
    NullspaceResult ns;
    std::string constraint;
    std::optional<Expr> kappa;

    [[nodiscard]] ExtensionSpec spec() const
    {
        auto s = inst.spec();
        if (kappa) {
            s.kappa = *kappa;
        }
        return s;
    }
    [[nodiscard]] GAnsatz ansatz() const { return g_basis(entry->chart, inst.m); }

    /// g1*G1 + g2*G2 + ... over the readable nullspace basis.
    [[nodiscard]] Expr general_g() const
    {
        const auto a = ansatz();
        if (ns.dim() == 1) {
            return a.combine(ns.readable.col(0));
        }
        Expr g(0);
        for (int k = 0; k < ns.dim(); ++k) {
            g += Expr::symbol(fmt::format("g{}", k + 1)) * a.combine(ns.readable.col(k));
        }
        return normalize(g);
    }

    /// Sum of the readable basis vectors (numeric).
    [[nodiscard]] Expr numeric_g() const
    {
        const auto a = ansatz();
        Expr g(0);
        for (int k = 0; k < ns.dim(); ++k) {
            g += a.combine(ns.readable.col(k));
        }
        return normalize(g);
    }
};

Prepared prepare(const Options &o)
{
    Prepared p;
    p.catalog = std::make_unique<Catalog>(open_catalog());
    p.entry = &p.catalog->find(o.id);
    const SystemEntry &e = *p.entry;
    ParamValues fixed = parse_params(o.params);
    const auto known = e.all_params();
    for (const auto &[k, v] : fixed) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw UsageError(fmt::format("{} has no parameter '{}'", e.id, k));
        }
    }
    if (!o.L0.empty()) {
        fixed["L0"] = parse_number(o.L0);
    }
    if (!o.kappa.empty()) {
        if (e.chart.family == ChartFamily::euclidean) {
            throw UsageError("--kappa applies to the curved branch only");
        }
        p.kappa = Expr(parse_number(o.kappa));
    }
    const bool flat = e.chart.family == ChartFamily::euclidean;

    std::vector<const Constraint *> tries;
    const bool explicit_constraint = !o.constraint.empty();
    if (explicit_constraint) {
        const Constraint *c = e.constraint(o.constraint);
        if (c == nullptr) {
            throw UsageError(fmt::format("{} has no constraint '{}'", e.id, o.constraint));
        }
        tries.push_back(c);
    } else {
        if (!flat || fixed.contains("L0")) {
            tries.push_back(nullptr);
        }
        for (const auto &c : e.constraints) {
            tries.push_back(&c);
        }
    }
    for (const Constraint *c : tries) {
        DrawOptions d;
        d.fixed = fixed;
        d.constraint = c;
        d.seed = o.seed;
        ParamValues values;
        try {
            values = draw_parameters(e, o.m, d);
        } catch (const ConstraintViolation &) {
            if (explicit_constraint) {
                throw;
            }
            continue;
        }
        p.inst = instantiate(e, values, o.m);
        p.ns = instance_nullspace(p.inst, o.seed);
        if (p.ns.dim() >= 1 || explicit_constraint) {
            p.constraint = c != nullptr ? c->name : "";
            break;
        }
    }
    if (p.ns.dim() == 0 && flat && !fixed.contains("L0") && !explicit_constraint) {
        // no table row applies: look for an L0 that makes the system singular
        DrawOptions d;
        d.fixed = fixed;
        d.seed = o.seed;
        ParamValues values = draw_parameters(e, o.m, d);
        Instance probe = instantiate(e, values, o.m);
        Sampler s(e.chart.sampler_config(o.seed, probe.complex()));
        for (const cplx l0 : admissible_L0(e.chart, probe.V, g_basis(e.chart, o.m), o.m, probe.c, probe.chart_params, s)) {
            if (std::abs(l0) < 1e-12) {
                continue;
            }
            values["L0"] = Number::snap(l0);
            p.inst = instantiate(e, values, o.m);
            p.ns = instance_nullspace(p.inst, o.seed);
            if (p.ns.dim() >= 1) {
                break;
            }
        }
    }
    if (p.entry == nullptr || p.inst.entry == nullptr) {
        throw ConstraintViolation(fmt::format("{}: no parameter values satisfy a table constraint", e.id));
    }
    if (!o.G.empty()) {
        return p;
    }
    if (p.ns.dim() == 0) {
        throw ConstraintViolation(fmt::format("{}: no compatible G at {} with m = {}", e.id,
                                              format_values(p.inst.values), o.m));
    }
    return p;
}

Expr chosen_g(const Prepared &p, const Options &o, bool symbolic)
{
    if (o.G.empty()) {
        return symbolic ? p.general_g() : p.numeric_g();
    }
    const Chart &chart = p.entry->chart;
    Expr g;
    try {
        g = normalize(parse_expr(o.G, chart.symbols()));
    } catch (const ParseError &e) {
        throw UsageError(fmt::format("--G: {}", e.what()));
    }
    Sampler s(chart.sampler_config(o.seed, p.inst.complex()));
    const double r = max_compatibility_residual(chart, p.inst.V, g, p.inst.m, p.inst.c, p.inst.L0, p.inst.chart_params, s, 50);
    if (!(r < 1e-9)) {
        throw ConstraintViolation(fmt::format("G = {} is not compatible with V (residual {:.3g})", to_string(g), r));
    }
    return g;
}

ExtendedSystem build(const Prepared &p, const Expr &g, bool closed_form)
{
    return extend(p.entry->chart, p.inst.L, p.spec(), g, p.inst.integrals, "u", closed_form);
}

void note_values(const Prepared &p, std::ostream &err)
{
    fmt::print(err, "# {} m={} {}{}\n", p.entry->id, p.inst.m, format_values(p.inst.values),
               p.constraint.empty() ? "" : fmt::format(" (constraint {})", p.constraint));
}

int cmd_list(std::ostream &out)
{
    const Catalog cat = open_catalog();
    for (const auto &e : cat.entries) {
        fmt::print(out, "{:<12} {:<4} {}\n", e.id, e.chart_id, e.title);
    }
    return ok;
}

int cmd_show(const std::string &id, std::ostream &out)
{
    const Catalog cat = open_catalog();
    const auto &e = cat.find(id);
    fmt::print(out, "id: {}\n", e.id);
    if (!e.title.empty()) {
        fmt::print(out, "title: {}\n", e.title);
    }
    std::string coords;
    for (const auto &c : e.chart.coords) {
        coords += (coords.empty() ? "" : ", ") + c;
    }
    fmt::print(out, "chart: {} ({}; {})\n", e.chart_id, family_name(e.chart.family), coords);
    std::string params;
    for (const auto &q : e.all_params()) {
        params += (params.empty() ? "" : ", ") + q;
    }
    fmt::print(out, "parameters: {}\n", params);
    for (const auto &[name, text] : e.lets) {
        fmt::print(out, "let {} = {}\n", name, text);
    }
    fmt::print(out, "potential: {}\n", e.potential_text);
    fmt::print(out, "V = {}\n", to_string(e.V));
    for (const auto &i : e.integrals) {
        fmt::print(out, "integral {} = {}\n", i.name, i.text);
    }
    for (const auto &c : e.constraints) {
        std::string rel;
        for (const auto &r : c.relation_text) {
            rel += (rel.empty() ? "" : "; ") + r;
        }
        std::string gs;
        for (const auto &g : c.expected_text) {
            gs += (gs.empty() ? "" : ", ") + g;
        }
        fmt::print(out, "constraint {}: {} => G in span{{{}}}\n", c.name, rel.empty() ? "(any parameters)" : rel, gs);
    }
    fmt::print(out, "real_domain: {}\nharmonic: {}\ncomplete: {}\ngeneric_dim: {}\n", e.real_domain, e.harmonic, e.complete,
               e.generic_dim);
    return ok;
}

int cmd_extend(const Options &o, std::ostream &out, std::ostream &err)
{
    const Prepared p = prepare(o);
    note_values(p, err);
    const Expr g = chosen_g(p, o, true);
    const ExtendedSystem ext = build(p, g, false);
    fmt::print(out, "spec: {}\nG = {}\nH = {}\n", describe(ext.spec), to_string(ext.G), to_string(ext.H));
    if (!o.json_path.empty()) {
        nlohmann::ordered_json j;
        j["target"] = o.id;
        j["m"] = o.m;
        j["spec"] = describe(ext.spec);
        nlohmann::ordered_json vals = nlohmann::ordered_json::object();
        for (const auto &[k, v] : p.inst.values) {
            vals[k] = v.to_string();
        }
        j["params"] = std::move(vals);
        j["G"] = to_string(ext.G);
        j["H"] = nlohmann::ordered_json::parse(to_json(ext.H));
        j["F"] = nlohmann::ordered_json::parse(to_json(ext.F()));
        write_file(o.json_path, j.dump(2));
    }
    return ok;
}

int cmd_integral(const Options &o, bool closed, std::ostream &out, std::ostream &err)
{
    const Prepared p = prepare(o);
    note_values(p, err);
    const Expr g = chosen_g(p, o, true);
    const ExtendedSystem ext = build(p, g, closed);
    fmt::print(out, "{}\n", to_string(ext.F()));
    if (!o.json_path.empty()) {
        write_file(o.json_path, to_json(ext.F(), 2));
    }
    return ok;
}

struct ScanArgs {
    std::string family;
    int m = 2;
    int samples = 0;
    std::uint64_t seed = 20120;
    int draws = 3;
    std::string json_path;
};

int cmd_scan(const ScanArgs &a, std::ostream &out)
{
    const Catalog cat = open_catalog();
    ScanOptions opt;
    opt.m = a.m;
    opt.samples = a.samples;
    opt.seed = a.seed;
    opt.off_draws = a.draws;
    std::vector<ScanRow> rows;
    try {
        rows = scan_tables(cat, a.family, opt);
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
    fmt::print(out, "{:<10} {:<10} {:<4} {:>3} {:>3} {:>10} {:<15} {:<5} {}\n", "entry", "constraint", "kind", "exp",
               "dim", "cosine", "verdict", "table", "G");
    bool all = true;
    for (const auto &r : rows) {
        all = all && r.matches;
        fmt::print(out, "{:<10} {:<10} {:<4} {:>3} {:>3} {:>10.3g} {:<15} {:<5} {}\n", r.entry, r.constraint, r.kind,
                   r.expected_dim, r.dim, r.cosine, r.extensible ? "extensible" : "not extensible",
                   r.matches ? "ok" : "DIFF", r.representative_g.empty() ? "-" : r.representative_g);
    }
    const std::string json = scan_to_json(rows);
    if (a.json_path.empty()) {
        fmt::print(out, "{}\n", json);
    } else {
        write_file(a.json_path, json);
    }
    return all ? ok : failed;
}

struct VerifyArgs {
    int trajectories = 1;
    double tol = 1e-10;
    double t_end = 10.0;
    int points = 100;
};

Binding chart_binding(const Prepared &p) { return p.inst.chart_params; }

int cmd_verify(const Options &o, const VerifyArgs &a, std::ostream &out, std::ostream &err)
{
    const Prepared p = prepare(o);
    note_values(p, err);
    const Expr g = chosen_g(p, o, false);
    const ExtendedSystem ext = build(p, g, false);
    VerifyConfig cfg;
    cfg.target = o.id;
    cfg.seed = o.seed;
    cfg.points = a.points;
    cfg.trajectories = a.trajectories;
    cfg.tol = a.tol;
    cfg.t_end = a.t_end;
    cfg.real_domain = !p.inst.complex();
    cfg.base_complete = p.entry->complete;
    cfg.params = chart_binding(p);
    for (const auto &[k, v] : p.inst.values) {
        cfg.param_values.emplace_back(k, v.value());
    }
    const VerificationReport rep = certify(ext, cfg);
    const std::string json = rep.to_json();
    fmt::print(out, "{}\n", json);
    if (!o.json_path.empty()) {
        write_file(o.json_path, json);
    }
    return rep.passed ? ok : failed;
}

std::vector<double> parse_list(const std::string &text)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find(',', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        const std::string item = text.substr(start, end - start);
        if (item.find_first_not_of(' ') != std::string::npos) {
            const Number n = parse_number(item);
            if (!n.is_real()) {
                throw UsageError(fmt::format("initial value '{}' is not real", item));
            }
            out.push_back(n.value().real());
        }
        start = end + 1;
    }
    return out;
}

/// "q=a,b,...,p=c,d,..." in the order (u, q...) and (p_u, p...).
State parse_initial(const std::string &text, std::size_t n)
{
    const auto qpos = text.find("q=");
    const auto ppos = text.find("p=");
    if (qpos == std::string::npos || ppos == std::string::npos || ppos < qpos) {
        throw UsageError("--initial expects \"q=..,p=..\"");
    }
    auto q = parse_list(text.substr(qpos + 2, ppos - qpos - 2));
    const auto pv = parse_list(text.substr(ppos + 2));
    if (q.size() != n || pv.size() != n) {
        throw UsageError(fmt::format("--initial needs {} coordinates and {} momenta (u first)", n, n));
    }
    q.insert(q.end(), pv.begin(), pv.end());
    return q;
}

struct SimulateArgs {
    std::string initial;
    double t_end = 10.0;
    double tol = 1e-10;
    std::string csv;
};

int cmd_simulate(const Options &o, const SimulateArgs &a, std::ostream &out, std::ostream &err)
{
    const Prepared p = prepare(o);
    if (p.inst.complex()) {
        throw UnsupportedChart(fmt::format("{} is complex; only real systems can be simulated", o.id));
    }
    note_values(p, err);
    const Expr g = chosen_g(p, o, false);
    const ExtendedSystem ext = build(p, g, false);
    const PhaseSpace &space = *ext.space;
    const std::size_t n = space.dim();
    State y;
    if (a.initial.empty()) {
        Sampler s(extended_sampler_config(ext, o.seed + 3, false));
        const Binding b = draw_phase_point(s, space, p.inst.chart_params);
        for (auto id : space.q_ids) {
            y.push_back(b.get(id)->real());
        }
        for (auto id : space.p_ids) {
            y.push_back(b.get(id)->real());
        }
    } else {
        y = parse_initial(a.initial, n);
    }

    std::unique_ptr<std::ofstream> file;
    std::ostream *csv = &out;
    if (!a.csv.empty()) {
        file = std::make_unique<std::ofstream>(a.csv);
        if (!*file) {
            throw IoError(fmt::format("cannot write '{}'", a.csv));
        }
        csv = file.get();
    }
    std::string header = "t";
    for (const auto &c : space.coords) {
        header += "," + c;
    }
    for (const auto &c : space.momenta) {
        header += "," + c;
    }
    for (const auto &i : ext.integrals) {
        header += "," + i.name;
    }
    *csv << header << '\n';
    std::vector<double> initial_values;
    std::vector<double> drift(ext.integrals.size(), 0.0);
    auto row = [&](double t, const State &s) {
        Binding b = p.inst.chart_params;
        for (std::size_t i = 0; i < n; ++i) {
            b.set(space.q_ids[i], s[i]);
            b.set(space.p_ids[i], s[n + i]);
        }
        std::string line = format_double(t);
        for (double v : s) {
            line += "," + format_double(v);
        }
        for (std::size_t k = 0; k < ext.integrals.size(); ++k) {
            const double v = eval_poly(ext.integrals[k].f, b).real();
            if (initial_values.size() < ext.integrals.size()) {
                initial_values.push_back(v);
            }
            drift[k] = std::max(drift[k], std::abs(v - initial_values[k]) / (1.0 + std::abs(initial_values[k])));
            line += "," + format_double(v);
        }
        *csv << line << '\n';
    };
    const auto stats = integrate_hamiltonian(ext.H, y, a.t_end, a.tol, p.inst.chart_params, row);
    if (file && !*file) {
        throw IoError(fmt::format("cannot write '{}'", a.csv));
    }
    fmt::print(err, "# steps {} accepted, {} rejected\n", stats.accepted, stats.rejected);
    for (std::size_t k = 0; k < drift.size(); ++k) {
        fmt::print(err, "# drift {} {:.3g}\n", ext.integrals[k].name, drift[k]);
    }
    return ok;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Superintegrable extensions of natural Hamiltonians", "hamext"};
    app.require_subcommand(1);

    app.add_subcommand("list", "catalog ids and titles");
    auto *show = app.add_subcommand("show", "chart, potential, parameters and constraints of an entry");
    std::string show_id;
    show->add_option("id", show_id, "catalog id")->required();

    Options ext_o;
    auto *extend_cmd = app.add_subcommand("extend", "build the extended Hamiltonian");
    add_common(extend_cmd, ext_o);
    extend_cmd->add_option("--json", ext_o.json_path, "write H, G and F as JSON");

    Options int_o;
    bool closed = false;
    bool iterative = false;
    auto *integral_cmd = app.add_subcommand("integral", "print U^m G");
    add_common(integral_cmd, int_o);
    auto *cf = integral_cmd->add_flag("--closed-form", closed, "use P_m G + D_m X_L G");
    integral_cmd->add_flag("--iterative", iterative, "apply U m times (default)")->excludes(cf);
    integral_cmd->add_option("--json", int_o.json_path, "write the polynomial as JSON");

    ScanArgs scan_a;
    auto *scan_cmd = app.add_subcommand("scan", "compatibility nullspaces across a table");
    scan_cmd->add_option("--family", scan_a.family, "E2, S2 or TTW")->required();
    scan_cmd->add_option("-m", scan_a.m, "extension order")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--samples", scan_a.samples, "sample points per nullspace")->check(CLI::NonNegativeNumber);
    scan_cmd->add_option("--seed", scan_a.seed, "seed");
    scan_cmd->add_option("--draws", scan_a.draws, "generic draws per entry")->check(CLI::NonNegativeNumber);
    scan_cmd->add_option("--json", scan_a.json_path, "write rows as JSON instead of printing them");

    Options ver_o;
    VerifyArgs ver_a;
    auto *verify_cmd = app.add_subcommand("verify", "certify the extension");
    add_common(verify_cmd, ver_o);
    verify_cmd->add_option("--trajectories", ver_a.trajectories, "trajectories for the drift test")
        ->check(CLI::NonNegativeNumber);
    verify_cmd->add_option("--tol", ver_a.tol, "integrator tolerance")->check(CLI::PositiveNumber);
    verify_cmd->add_option("-T", ver_a.t_end, "integration time")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--points", ver_a.points, "bracket sample points")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--json", ver_o.json_path, "also write the report here");

    Options sim_o;
    SimulateArgs sim_a;
    auto *simulate_cmd = app.add_subcommand("simulate", "integrate the extended flow and track the integrals");
    add_common(simulate_cmd, sim_o);
    simulate_cmd->add_option("--initial", sim_a.initial, "\"q=u,q1,..,p=p_u,p1,..\"");
    simulate_cmd->add_option("-T", sim_a.t_end, "integration time")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--tol", sim_a.tol, "integrator tolerance")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--csv", sim_a.csv, "output file (stdout when omitted)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError &e) {
        const auto *sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << "error: " << e.what() << "\n" << sub->help();
        return usage;
    }

    try {
        if (app.got_subcommand("list")) {
            return cmd_list(out);
        }
        if (app.got_subcommand(show)) {
            return cmd_show(show_id, out);
        }
        if (app.got_subcommand(extend_cmd)) {
            return cmd_extend(ext_o, out, err);
        }
        if (app.got_subcommand(integral_cmd)) {
            return cmd_integral(int_o, closed, out, err);
        }
        if (app.got_subcommand(scan_cmd)) {
            return cmd_scan(scan_a, out);
        }
        if (app.got_subcommand(verify_cmd)) {
            return cmd_verify(ver_o, ver_a, out, err);
        }
        if (app.got_subcommand(simulate_cmd)) {
            return cmd_simulate(sim_o, sim_a, out, err);
        }
    } catch (const UnknownEntry &e) {
        err << "error: " << e.what() << "\n";
        return unsupported;
    } catch (const UnsupportedChart &e) {
        err << "error: " << e.what() << "\n";
        return unsupported;
    } catch (const IoError &e) {
        err << "error: " << e.what() << "\n";
        return io_error;
    } catch (const UsageError &e) {
        err << "error: " << e.what() << "\n";
        return usage;
    } catch (const ConstraintViolation &e) {
        err << "error: " << e.what() << "\n";
        return failed;
    } catch (const InadmissibleSpec &e) {
        err << "error: " << e.what() << "\n";
        return failed;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return failed;
    }
    return usage;
}

} // namespace hamext::cli
