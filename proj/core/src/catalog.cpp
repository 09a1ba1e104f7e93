#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "hamext/catalog.hpp"

namespace hamext {

CatalogError::CatalogError(const std::string &what, std::string entry, std::size_t line)
    : std::runtime_error(entry.empty() ? fmt::format("line {}: {}", line, what)
                                       : fmt::format("entry {} (line {}): {}", entry, line, what)),
      entry_(std::move(entry)), line_(line)
{
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    for (auto &item : split(s, ',')) {
        if (!item.empty()) {
            out.push_back(std::move(item));
        }
    }
    return out;
}

bool parse_bool(const std::string &v, const std::string &entry, std::size_t line)
{
    if (v == "true") {
        return true;
    }
    if (v == "false") {
        return false;
    }
    throw CatalogError(fmt::format("expected true or false, got '{}'", v), entry, line);
}

struct Line {
    std::size_t number;
    std::string text;
};

std::vector<Line> logical_lines(std::string_view text)
{
    std::vector<Line> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t n = 0;
    std::string pending;
    std::size_t pending_line = 0;
    while (std::getline(in, raw)) {
        ++n;
        std::string t = trim(raw);
        if (pending.empty() && (t.empty() || t.front() == '#')) {
            continue;
        }
        if (pending.empty()) {
            pending_line = n;
        }
        const bool more = !t.empty() && t.back() == '\\';
        if (more) {
            t = trim(t.substr(0, t.size() - 1));
        }
        pending += pending.empty() || t.empty() ? t : " " + t;
        if (!more) {
            out.push_back({pending_line, pending});
            pending.clear();
        }
    }
    if (!pending.empty()) {
        out.push_back({pending_line, pending});
    }
    return out;
}

/// "key rest = value": key, name (may be empty), value.
struct KeyValue {
    std::string key;
    std::string name;
    std::string value;
};

KeyValue key_value(const Line &l, const std::string &entry)
{
    const auto eq = l.text.find('=');
    if (eq == std::string::npos) {
        throw CatalogError(fmt::format("expected 'key = value', got '{}'", l.text), entry, l.number);
    }
    const std::string lhs = trim(std::string_view(l.text).substr(0, eq));
    KeyValue kv;
    kv.value = trim(std::string_view(l.text).substr(eq + 1));
    const auto sp = lhs.find_first_of(" \t");
    if (sp == std::string::npos) {
        kv.key = lhs;
    } else {
        kv.key = lhs.substr(0, sp);
        kv.name = trim(std::string_view(lhs).substr(sp));
    }
    return kv;
}

using Lets = std::map<std::string, Expr, std::less<>>;

Expr parse_with(const std::string &text, const SymbolTable &table, const Lets &lets, const std::string &entry,
                std::size_t line)
{
    try {
        return normalize(substitute(parse_expr(text, table), lets));
    } catch (const ParseError &e) {
        throw CatalogError(fmt::format("{} in '{}'", e.what(), text), entry, line);
    }
}

void add_symbols(SymbolTable &t, const std::vector<std::string> &names, SymbolKind kind = SymbolKind::parameter)
{
    for (const auto &n : names) {
        t.push_back({n, kind});
    }
}

Chart build_chart(const ChartDef &d, std::size_t line)
{
    Chart c;
    switch (d.family) {
    case ChartFamily::euclidean:
        if (d.coords.empty()) {
            throw CatalogError("euclidean chart needs coords", d.id, line);
        }
        c = euclidean_chart(d.coords, d.id);
        break;
    case ChartFamily::sphere: c = sphere_chart(); break;
    case ChartFamily::ttw: c = ttw_chart(); break;
    case ChartFamily::generic: throw CatalogError("generic charts are not supported in the catalog", d.id, line);
    }
    c.id = d.id;
    for (const auto &[name, box] : d.boxes) {
        if (std::find(c.coords.begin(), c.coords.end(), name) == c.coords.end()) {
            throw CatalogError(fmt::format("box for unknown coordinate '{}'", name), d.id, line);
        }
        c.boxes[name] = box;
    }
    return c;
}

struct RawSystem {
    std::string id;
    std::size_t line = 0;
    std::vector<std::pair<Line, KeyValue>> fields;
};

SystemEntry build_system(const RawSystem &raw, const std::vector<ChartDef> &charts)
{
    SystemEntry e;
    e.id = raw.id;
    e.line = raw.line;
    const ChartDef *chart = nullptr;
    for (const auto &[l, kv] : raw.fields) {
        if (kv.key == "chart") {
            auto it = std::find_if(charts.begin(), charts.end(), [&](const ChartDef &c) { return c.id == kv.value; });
            if (it == charts.end()) {
                throw CatalogError(fmt::format("unknown chart '{}'", kv.value), e.id, l.number);
            }
            chart = &*it;
        }
    }
    if (chart == nullptr) {
        throw CatalogError("missing 'chart'", e.id, raw.line);
    }
    e.chart_id = chart->id;
    e.chart = chart->chart;
    for (const auto &[l, kv] : raw.fields) {
        if (kv.key == "params") {
            e.params = split_list(kv.value);
        }
    }
    SymbolTable table = e.chart.symbols();
    add_symbols(table, e.params);
    Lets lets;
    auto add_let = [&](const std::string &name, const std::string &text, std::size_t line) {
        SymbolTable t = table;
        const Expr v = parse_with(text, t, lets, e.id, line);
        lets[name] = v;
        table.push_back({name, SymbolKind::parameter});
    };
    for (const auto &[name, text] : chart->lets) {
        add_let(name, text, raw.line);
    }
    SymbolTable rel_table = table;
    rel_table.push_back({"m", SymbolKind::parameter});
    rel_table.push_back({"L0", SymbolKind::parameter});

    bool have_potential = false;
    for (const auto &[l, kv] : raw.fields) {
        const std::size_t n = l.number;
        if (kv.key == "chart" || kv.key == "params") {
            continue;
        }
        if (kv.key == "title") {
            e.title = kv.value;
        } else if (kv.key == "let") {
            if (kv.name.empty()) {
                throw CatalogError("let needs a name", e.id, n);
            }
            e.lets.emplace_back(kv.name, kv.value);
            add_let(kv.name, kv.value, n);
            rel_table.push_back({kv.name, SymbolKind::parameter});
        } else if (kv.key == "potential") {
            e.potential_text = kv.value;
            e.V = parse_with(kv.value, table, lets, e.id, n);
            have_potential = true;
        } else if (kv.key == "integral") {
            const Expr f = parse_with(kv.value, table, lets, e.id, n);
            try {
                e.integrals.push_back({kv.name, kv.value, MomentumPolynomial::from_expr(e.chart.space, f)});
            } catch (const std::invalid_argument &ex) {
                throw CatalogError(fmt::format("integral {}: {}", kv.name, ex.what()), e.id, n);
            }
        } else if (kv.key == "constraint") {
            Constraint c;
            c.name = kv.name;
            const auto arrow = kv.value.find("=>");
            if (arrow == std::string::npos) {
                throw CatalogError(fmt::format("constraint {}: expected 'relations => G'", kv.name), e.id, n);
            }
            for (const auto &rel : split(std::string_view(kv.value).substr(0, arrow), ';')) {
                if (rel.empty()) {
                    continue;
                }
                const auto eq = rel.find('=');
                if (eq == std::string::npos) {
                    throw CatalogError(fmt::format("relation '{}' needs '= 0'", rel), e.id, n);
                }
                const Expr lhs = parse_with(trim(rel.substr(0, eq)), rel_table, lets, e.id, n);
                const Expr rhs = parse_with(trim(rel.substr(eq + 1)), rel_table, lets, e.id, n);
                c.relation_text.push_back(rel);
                c.relations.push_back(normalize(lhs - rhs));
            }
            for (const auto &g : split(std::string_view(kv.value).substr(arrow + 2), ';')) {
                if (g.empty()) {
                    continue;
                }
                c.expected_text.push_back(g);
                c.expected_g.push_back(parse_with(g, rel_table, lets, e.id, n));
            }
            e.constraints.push_back(std::move(c));
        } else if (kv.key == "generic_dim") {
            try {
                e.generic_dim = std::stoi(kv.value);
            } catch (const std::exception &) {
                throw CatalogError(fmt::format("generic_dim must be an integer, got '{}'", kv.value), e.id, n);
            }
        } else if (kv.key == "harmonic") {
            e.harmonic = parse_bool(kv.value, e.id, n);
        } else if (kv.key == "complete") {
            e.complete = parse_bool(kv.value, e.id, n);
        } else if (kv.key == "real_domain") {
            e.real_domain = parse_bool(kv.value, e.id, n);
        } else {
            throw CatalogError(fmt::format("unknown field '{}'", kv.key), e.id, n);
        }
    }
    if (!have_potential) {
        throw CatalogError("missing 'potential'", e.id, raw.line);
    }
    return e;
}

std::uint64_t mix(std::uint64_t seed, std::string_view tag)
{
    return seed ^ (std::hash<std::string_view>{}(tag) * 0x9e3779b97f4a7c15ULL);
}

Number draw_param(std::mt19937_64 &rng, bool complex, bool exact)
{
    std::uniform_real_distribution<double> re(0.5, 1.5);
    std::uniform_real_distribution<double> im(-0.5, 0.5);
    const double r = re(rng);
    const cplx v = complex ? cplx(r, im(rng)) : cplx(r, 0.0);
    if (!exact) {
        return Number::inexact(v);
    }
    const auto eighths = [](double x) { return static_cast<std::int64_t>(std::lround(8.0 * x)); };
    return {Rational(eighths(v.real()), 8), Rational(eighths(v.imag()), 8)};
}

bool flat_chart(const Chart &c) { return c.family == ChartFamily::euclidean; }

} // namespace

SelfValidationError::SelfValidationError(std::vector<ValidationFailure> failures)
    : std::runtime_error([&] {
          std::string msg = "self-validation failed:";
          for (const auto &f : failures) {
              msg += fmt::format(" {}:{} residual {:.3g};", f.entry, f.integral, f.residual);
          }
          return msg;
      }()),
      failures_(std::move(failures))
{
}

std::vector<std::string> SystemEntry::all_params() const
{
    std::vector<std::string> out = chart.params;
    out.insert(out.end(), params.begin(), params.end());
    return out;
}

const Constraint *SystemEntry::constraint(std::string_view name) const
{
    for (const auto &c : constraints) {
        if (c.name == name) {
            return &c;
        }
    }
    return nullptr;
}

const SystemEntry &Catalog::find(std::string_view id) const
{
    for (const auto &e : entries) {
        if (e.id == id) {
            return e;
        }
    }
    throw UnknownEntry(std::string(id));
}

bool Catalog::contains(std::string_view id) const
{
    return std::any_of(entries.begin(), entries.end(), [&](const SystemEntry &e) { return e.id == id; });
}

Catalog parse_catalog(std::string_view text, std::string source, bool validate)
{
    Catalog cat;
    cat.source = std::move(source);
    std::vector<RawSystem> systems;
    ChartDef *chart = nullptr;
    RawSystem *system = nullptr;
    std::vector<std::size_t> chart_lines;
    for (const auto &l : logical_lines(text)) {
        if (l.text.front() == '[') {
            if (l.text.back() != ']') {
                throw CatalogError(fmt::format("malformed section header '{}'", l.text), "", l.number);
            }
            const auto parts = split_list(std::string_view(l.text).substr(1, l.text.size() - 2));
            const auto words = split(parts.empty() ? "" : parts.front(), ' ');
            if (words.size() != 2 || (words[0] != "chart" && words[0] != "system") || words[1].empty()) {
                throw CatalogError(fmt::format("expected [chart ID] or [system ID], got '{}'", l.text), "", l.number);
            }
            chart = nullptr;
            system = nullptr;
            if (words[0] == "chart") {
                cat.charts.push_back({});
                chart = &cat.charts.back();
                chart->id = words[1];
                chart_lines.push_back(l.number);
            } else {
                for (const auto &s : systems) {
                    if (s.id == words[1]) {
                        throw CatalogError("duplicate id", words[1], l.number);
                    }
                }
                systems.push_back({words[1], l.number, {}});
                system = &systems.back();
            }
            continue;
        }
        if (chart != nullptr) {
            const KeyValue kv = key_value(l, chart->id);
            if (kv.key == "family") {
                if (kv.value == "euclidean") {
                    chart->family = ChartFamily::euclidean;
                } else if (kv.value == "sphere") {
                    chart->family = ChartFamily::sphere;
                } else if (kv.value == "ttw") {
                    chart->family = ChartFamily::ttw;
                } else {
                    throw CatalogError(fmt::format("unknown chart family '{}'", kv.value), chart->id, l.number);
                }
            } else if (kv.key == "coords") {
                chart->coords = split_list(kv.value);
            } else if (kv.key == "box") {
                const auto lim = split_list(kv.value);
                try {
                    if (lim.size() != 2) {
                        throw std::invalid_argument("two limits");
                    }
                    chart->boxes.emplace_back(kv.name, Box{std::stod(lim[0]), std::stod(lim[1])});
                } catch (const std::exception &) {
                    throw CatalogError(fmt::format("box {} needs 'lo, hi'", kv.name), chart->id, l.number);
                }
            } else if (kv.key == "let") {
                chart->lets.emplace_back(kv.name, kv.value);
            } else {
                throw CatalogError(fmt::format("unknown chart field '{}'", kv.key), chart->id, l.number);
            }
        } else if (system != nullptr) {
            system->fields.emplace_back(l, key_value(l, system->id));
        } else {
            throw CatalogError(fmt::format("field outside a section: '{}'", l.text), "", l.number);
        }
    }
    for (std::size_t i = 0; i < cat.charts.size(); ++i) {
        cat.charts[i].chart = build_chart(cat.charts[i], chart_lines[i]);
    }
    for (const auto &raw : systems) {
        cat.entries.push_back(build_system(raw, cat.charts));
    }
    if (validate) {
        std::vector<ValidationFailure> failures;
        for (const auto &e : cat.entries) {
            auto f = validate_entry(e);
            failures.insert(failures.end(), f.begin(), f.end());
        }
        if (!failures.empty()) {
            throw SelfValidationError(std::move(failures));
        }
    }
    return cat;
}

Catalog load_catalog(const std::string &path, bool validate)
{
    std::ifstream in(path);
    if (!in) {
        throw std::ios_base::failure("cannot open catalog '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_catalog(ss.str(), path, validate);
}

std::string default_catalog_path()
{
    if (const char *env = std::getenv("HAMEXT_CATALOG"); env != nullptr && *env != '\0') {
        return env;
    }
#ifdef HAMEXT_INSTALL_CATALOG
    if (std::filesystem::exists(HAMEXT_INSTALL_CATALOG)) {
        return HAMEXT_INSTALL_CATALOG;
    }
#endif
#ifdef HAMEXT_SOURCE_CATALOG
    return HAMEXT_SOURCE_CATALOG;
#else
    return "catalog.ham";
#endif
}

std::string format_catalog(const Catalog &c)
{
    std::string out;
    for (const auto &d : c.charts) {
        out += fmt::format("[chart {}]\nfamily = {}\n", d.id, family_name(d.family));
        if (d.family == ChartFamily::euclidean) {
            out += "coords = ";
            for (std::size_t i = 0; i < d.coords.size(); ++i) {
                out += (i ? ", " : "") + d.coords[i];
            }
            out += "\n";
        }
        for (const auto &[name, box] : d.boxes) {
            out += fmt::format("box {} = {}, {}\n", name, format_double(box.lo), format_double(box.hi));
        }
        for (const auto &[name, text] : d.lets) {
            out += fmt::format("let {} = {}\n", name, text);
        }
        out += "\n";
    }
    for (const auto &e : c.entries) {
        out += fmt::format("[system {}]\nchart = {}\n", e.id, e.chart_id);
        if (!e.title.empty()) {
            out += fmt::format("title = {}\n", e.title);
        }
        out += "params = ";
        for (std::size_t i = 0; i < e.params.size(); ++i) {
            out += (i ? ", " : "") + e.params[i];
        }
        out += "\n";
        for (const auto &[name, text] : e.lets) {
            out += fmt::format("let {} = {}\n", name, text);
        }
        out += fmt::format("potential = {}\n", e.potential_text);
        for (const auto &i : e.integrals) {
            out += fmt::format("integral {} = {}\n", i.name, i.text);
        }
        for (const auto &k : e.constraints) {
            std::string rel;
            for (std::size_t i = 0; i < k.relation_text.size(); ++i) {
                rel += (i ? "; " : "") + k.relation_text[i];
            }
            std::string gs;
            for (std::size_t i = 0; i < k.expected_text.size(); ++i) {
                gs += (i ? "; " : "") + k.expected_text[i];
            }
            out += fmt::format("constraint {} = {}{}=> {}\n", k.name, rel, rel.empty() ? "" : " ", gs);
        }
        out += fmt::format("generic_dim = {}\nharmonic = {}\ncomplete = {}\nreal_domain = {}\n\n", e.generic_dim,
                           e.harmonic, e.complete, e.real_domain);
    }
    return out;
}

std::vector<ValidationFailure> validate_entry(const SystemEntry &e, std::uint64_t seed, double tol)
{
    std::vector<ValidationFailure> out;
    if (e.integrals.empty()) {
        return out;
    }
    DrawOptions opt;
    opt.seed = mix(seed, e.id);
    const Binding params = to_binding(draw_parameters(e, 1, opt));
    const auto l = e.hamiltonian();
    Sampler s(e.chart.sampler_config(mix(seed, e.id + "/points"), !e.real_domain));
    for (const auto &i : e.integrals) {
        const double r = bracket_residual_max(l, i.f, s, 100, params);
        if (!(r < tol)) {
            out.push_back({e.id, i.name, r});
        }
    }
    return out;
}

Binding to_binding(const ParamValues &v)
{
    Binding b;
    for (const auto &[name, n] : v) {
        b.set(name, n.value());
    }
    return b;
}

ParamValues draw_parameters(const SystemEntry &e, int m, const DrawOptions &opt)
{
    ParamValues v = opt.fixed;
    std::mt19937_64 rng(opt.seed);
    const bool complex = opt.complex.value_or(!e.real_domain);
    for (const auto &p : e.all_params()) {
        const Number x = draw_param(rng, complex, opt.exact);
        if (!v.contains(p)) {
            v[p] = x;
        }
    }
    const bool flat = flat_chart(e.chart);
    {
        const Number x = draw_param(rng, complex, opt.exact);
        if (!v.contains("L0")) {
            v["L0"] = flat ? x : Number(0);
        }
    }
    if (opt.constraint == nullptr) {
        return v;
    }
    std::set<std::string, std::less<>> fixed;
    for (const auto &[k, x] : opt.fixed) {
        fixed.insert(k);
    }
    if (!flat) {
        fixed.insert("L0");
    }
    std::vector<std::string> order = e.all_params();
    order.emplace_back("L0");
    for (std::size_t r = 0; r < opt.constraint->relations.size(); ++r) {
        const Expr &rel = opt.constraint->relations[r];
        const auto syms = free_symbols(rel);
        std::string target;
        for (const auto &name : order) {
            if (syms.contains(name) && !fixed.contains(name)) {
                target = name;
                break;
            }
        }
        Binding b = to_binding(v);
        b.set("m", static_cast<double>(m));
        if (target.empty()) {
            const cplx val = eval(rel, b);
            if (std::abs(val) > 1e-9 * (1.0 + eval_magnitude(rel, b))) {
                throw ConstraintViolation(fmt::format("{}: constraint {} requires {} (residual {:.3g})", e.id,
                                                      opt.constraint->name, opt.constraint->relation_text[r], std::abs(val)));
            }
            continue;
        }
        auto at = [&](double x) {
            Binding bb = b;
            bb.set(target, x);
            return eval(rel, bb);
        };
        const cplx r0 = at(0.0);
        const cplx r1 = at(1.0) - r0;
        const cplx r2 = at(2.0) - r0;
        if (std::abs(r1) < 1e-14 || std::abs(r2 - 2.0 * r1) > 1e-9 * (std::abs(r0) + std::abs(r1) + 1.0)) {
            throw ConstraintViolation(fmt::format("{}: relation '{}' is not linear in {}", e.id,
                                                  opt.constraint->relation_text[r], target));
        }
        v[target] = Number::snap(-r0 / r1, 1e-11);
        fixed.insert(target);
    }
    return v;
}

ExtensionSpec Instance::spec() const
{
    if (flat_chart(entry->chart)) {
        return ExtensionSpec::flat_default(m, L0);
    }
    auto s = ExtensionSpec::curved_default(m, c);
    s.L0 = L0;
    return s;
}

bool Instance::complex() const
{
    if (!entry->real_domain) {
        return true;
    }
    return std::any_of(values.begin(), values.end(), [](const auto &kv) { return !kv.second.is_real(); });
}

Instance instantiate(const SystemEntry &e, const ParamValues &values, int m)
{
    if (m < 1) {
        throw std::invalid_argument("m must be a positive integer");
    }
    Instance inst;
    inst.entry = &e;
    inst.values = values;
    inst.m = m;
    std::map<std::string, Expr, std::less<>> sub;
    for (const auto &p : e.params) {
        auto it = values.find(p);
        if (it == values.end()) {
            throw UnboundParameter(fmt::format("{}: parameter '{}' has no value", e.id, p));
        }
        sub[p] = Expr(it->second);
    }
    for (const auto &p : e.chart.params) {
        auto it = values.find(p);
        if (it == values.end()) {
            throw UnboundParameter(fmt::format("{}: chart parameter '{}' has no value", e.id, p));
        }
        if (p == "zeta" && it->second.is_zero()) {
            throw ConstraintViolation(fmt::format("{}: zeta = 0 makes the metric singular", e.id));
        }
        inst.chart_params.set(p, it->second.value());
    }
    const bool flat = flat_chart(e.chart);
    auto l0 = values.find("L0");
    if (flat && l0 == values.end()) {
        throw UnboundParameter(fmt::format("{}: L0 has no value", e.id));
    }
    inst.L0 = l0 != values.end() ? Expr(l0->second) : Expr(0);
    switch (e.chart.family) {
    case ChartFamily::euclidean: inst.c = Expr(0); break;
    case ChartFamily::sphere: inst.c = Expr(Number::rational(1, m)); break;
    case ChartFamily::ttw: inst.c = normalize(Expr::symbol("chi") / Expr(m)); break;
    case ChartFamily::generic: throw UnsupportedChart(fmt::format("{}: generic chart", e.id));
    }
    inst.V = normalize(substitute(e.V, sub));
    inst.L = e.chart.hamiltonian(inst.V);
    for (const auto &i : e.integrals) {
        inst.integrals.push_back({i.name, i.f.substitute(sub)});
    }
    return inst;
}

NullspaceResult instance_nullspace(const Instance &inst, std::uint64_t seed, int samples)
{
    const auto &chart = inst.entry->chart;
    Sampler s(chart.sampler_config(seed, inst.complex()));
    return compatibility_nullspace(chart, inst.V, g_basis(chart, inst.m), inst.m, inst.c, inst.L0, inst.chart_params, s,
                                   samples);
}

ExtendedSystem extend_instance(const Instance &inst, const Expr &g, bool closed_form)
{
    return extend(inst.entry->chart, inst.L, inst.spec(), g, inst.integrals, "u", closed_form);
}

namespace {

// least-squares coefficients of `g` over the basis, from sampled values; nullopt when
// g is not in the span
std::optional<CVector> project(const std::vector<Expr> &basis, const Expr &g, const Chart &chart, const Binding &params,
                               Sampler &s)
{
    const auto nb = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index rows = 3 * nb + 6;
    CMatrix a(rows, nb);
    CVector y(rows);
    Eigen::Index r = 0;
    int failures = 0;
    while (r < rows) {
        const Binding b = s.draw(chart.coords, params);
        try {
            for (Eigen::Index j = 0; j < nb; ++j) {
                a(r, j) = eval(basis[static_cast<std::size_t>(j)], b);
            }
            y(r) = eval(g, b);
            ++r;
        } catch (const EvalError &) {
            if (++failures > 1000) {
                throw SamplerExhausted("cannot sample the predicted G");
            }
        }
    }
    const CVector x = a.completeOrthogonalDecomposition().solve(y);
    if ((a * x - y).norm() > 1e-8 * (1.0 + y.norm())) {
        return std::nullopt;
    }
    return x;
}

double min_cosine(const CMatrix &a, const CMatrix &b)
{
    if (a.cols() == 0 && b.cols() == 0) {
        return 1.0;
    }
    if (a.cols() != b.cols()) {
        return 0.0;
    }
    const Eigen::VectorXd c = principal_cosines(a, b);
    return c.size() == 0 ? 0.0 : c.minCoeff();
}

bool family_matches(const Chart &c, std::string_view family)
{
    if (family == "E2") {
        return c.family == ChartFamily::euclidean && c.dim() == 2;
    }
    if (family == "S2") {
        return c.family == ChartFamily::sphere;
    }
    if (family == "TTW") {
        return c.family == ChartFamily::ttw;
    }
    throw std::invalid_argument(fmt::format("unknown family '{}' (expected E2, S2 or TTW)", family));
}

void evaluate_row(ScanRow &row, const Instance &inst, const ScanOptions &opt, std::uint64_t seed,
                  const std::vector<Expr> *expected)
{
    const auto &chart = inst.entry->chart;
    const auto ns = instance_nullspace(inst, seed, opt.samples);
    row.dim = ns.dim();
    const GAnsatz ansatz = g_basis(chart, inst.m);
    if (expected != nullptr) {
        std::map<std::string, Expr, std::less<>> sub;
        for (const auto &[k, v] : inst.values) {
            sub[k] = Expr(v);
        }
        sub["m"] = Expr(inst.m);
        for (const auto &p : chart.params) {
            sub.erase(p);
        }
        Sampler s(chart.sampler_config(mix(seed, "project"), inst.complex()));
        CMatrix pred(static_cast<Eigen::Index>(ansatz.basis.size()), static_cast<Eigen::Index>(expected->size()));
        bool in_span = true;
        for (std::size_t k = 0; k < expected->size(); ++k) {
            const Expr g = normalize(substitute((*expected)[k], sub));
            const auto x = project(ansatz.basis, g, chart, inst.chart_params, s);
            if (!x) {
                in_span = false;
                break;
            }
            pred.col(static_cast<Eigen::Index>(k)) = *x;
        }
        row.cosine = in_span ? min_cosine(pred, ns.basis) : 0.0;
    } else {
        row.cosine = row.dim == row.expected_dim ? 1.0 : 0.0;
    }
    row.matches = row.dim == row.expected_dim && row.cosine > 1 - 1e-8;
    if (row.dim >= 1) {
        const Expr g = ansatz.combine(ns.readable.col(0));
        row.representative_g = to_string(g);
        const ExtendedSystem ext = extend_instance(inst, g);
        Sampler ps(extended_sampler_config(ext, mix(seed, "bracket"), inst.complex()));
        row.bracket = bracket_residual_max(ext.H, ext.F(), ps, opt.bracket_points, inst.chart_params);
        row.extensible = row.bracket < 1e-9;
    }
}

} // namespace

std::vector<ScanRow> scan_tables(const Catalog &cat, std::string_view family, const ScanOptions &opt)
{
    std::vector<ScanRow> rows;
    for (const auto &e : cat.entries) {
        if (!family_matches(e.chart, family)) {
            continue;
        }
        for (const auto &c : e.constraints) {
            ScanRow row;
            row.entry = e.id;
            row.constraint = c.name;
            row.kind = "on";
            row.expected_dim = static_cast<int>(c.expected_g.size());
            row.harmonic = e.harmonic;
            const std::uint64_t seed = mix(opt.seed, e.id + "/" + c.name);
            DrawOptions d;
            d.constraint = &c;
            d.seed = seed;
            const Instance inst = instantiate(e, draw_parameters(e, opt.m, d), opt.m);
            evaluate_row(row, inst, opt, seed, &c.expected_g);
            rows.push_back(std::move(row));
        }
        for (int k = 0; k < opt.off_draws; ++k) {
            ScanRow row;
            row.entry = e.id;
            row.constraint = "generic";
            row.kind = "off";
            row.draw = k;
            row.expected_dim = e.generic_dim;
            row.harmonic = e.harmonic;
            const std::uint64_t seed = mix(opt.seed + static_cast<std::uint64_t>(k), e.id + "/generic");
            DrawOptions d;
            d.seed = seed;
            const Instance inst = instantiate(e, draw_parameters(e, opt.m, d), opt.m);
            evaluate_row(row, inst, opt, seed, nullptr);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string scan_to_json(const std::vector<ScanRow> &rows, int indent)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto &r : rows) {
        nlohmann::ordered_json j;
        j["entry"] = r.entry;
        j["constraint"] = r.constraint;
        j["kind"] = r.kind;
        j["draw"] = r.draw;
        j["expected_dim"] = r.expected_dim;
        j["dim"] = r.dim;
        j["cosine"] = r.cosine;
        j["G"] = r.representative_g;
        j["bracket"] = r.bracket;
        j["verdict"] = r.extensible ? "extensible" : "not extensible";
        j["matches_table"] = r.matches;
        arr.push_back(std::move(j));
    }
    return arr.dump(indent);
}

TtwBranch recover_ttw_branch(cplx a1, cplx a2, cplx zeta, std::string_view x2)
{
    if (a1 == 0.0 && a2 == 0.0) {
        throw std::invalid_argument("the second branch needs a1 or a2 nonzero");
    }
    const cplx s = std::sqrt(zeta);
    TtwBranch b;
    // tan(sqrt(zeta) xi) = sqrt(zeta) a2 / a1
    if (std::abs(a1) > 1e-300) {
        b.xi = std::atan(s * a2 / a1) / s;
    } else {
        b.xi = std::acos(cplx(0.0)) / s;
    }
    const cplx c_xi = std::cos(s * b.xi);
    const cplx s_xi = std::sin(s * b.xi) / s;
    b.amplitude = std::abs(c_xi) > std::abs(s_xi) ? a1 / c_xi : a2 / s_xi;
    const Expr x = Expr::symbol(x2, SymbolKind::coordinate);
    const Expr amp(Number::inexact(b.amplitude));
    b.F = normalize(pow(amp * c_kappa(Expr(Number::inexact(zeta)), x + Expr(Number::inexact(b.xi))), -2));
    return b;
}

} // namespace hamext
