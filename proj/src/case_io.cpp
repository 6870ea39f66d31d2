#include "gwflow/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gwflow/rng.hpp"
#include "gwflow/units.hpp"
#include "gwflow/vtk_io.hpp"

namespace gwflow {

CaseError::CaseError(const std::string& k, int l, const std::string& message)
    : std::runtime_error(l > 0 ? "line " + std::to_string(l) + ": " + (k.empty() ? "" : "'" + k + "': ") + message
                               : (k.empty() ? "" : "'" + k + "': ") + message),
      key(k),
      line(l)
{
}

CaseError::CaseError(const CaseError& inner, const std::string& prefix)
    : std::runtime_error(prefix + ": " + inner.what()), key(inner.key), line(inner.line)
{
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s)
{
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

bool parse_double(const std::string& s, double& out)
{
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string fmt17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RawEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

struct RawSection {
    std::string name;
    int line = 0;
    std::map<std::string, RawEntry> entries;
    std::vector<std::string> order;
};

struct RawCase {
    std::vector<RawSection> sections;

    RawSection* find(const std::string& name)
    {
        for (auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

bool known_section(const std::string& name)
{
    static const char* names[] = {"mesh", "fluid", "vangenuchten", "permeability", "initial", "time", "picard", "output"};
    for (const char* n : names)
        if (name == n) return true;
    return name.rfind("bc.", 0) == 0 && name.size() > 3;
}

RawCase parse_raw(std::string_view text)
{
    RawCase raw;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    RawSection* current = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw CaseError("", lineno, "malformed section header '" + t + "'");
            const std::string name = trim(std::string_view(t).substr(1, t.size() - 2));
            if (!known_section(name)) throw CaseError("", lineno, "unknown section [" + name + "]");
            if (raw.find(name)) throw CaseError("", lineno, "duplicate section [" + name + "]");
            raw.sections.push_back(RawSection{name, lineno, {}, {}});
            current = &raw.sections.back();
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw CaseError("", lineno, "expected 'key = value', got '" + t + "'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (!current) throw CaseError(key, lineno, "key outside of any section");
        if (key.empty()) throw CaseError("", lineno, "empty key");
        if (value.empty()) throw CaseError(key, lineno, "empty value");
        if (current->entries.count(key)) throw CaseError(current->name + "." + key, lineno, "duplicate key");
        current->entries.emplace(key, RawEntry{value, lineno, false});
        current->order.push_back(key);
    }
    return raw;
}

void apply_overrides(RawCase& raw, const std::vector<Override>& overrides)
{
    for (const auto& o : overrides) {
        if (!known_section(o.section)) throw CaseError(o.section + "." + o.key, 0, "override names unknown section");
        RawSection* s = raw.find(o.section);
        if (!s) {
            raw.sections.push_back(RawSection{o.section, 0, {}, {}});
            s = &raw.sections.back();
        }
        auto it = s->entries.find(o.key);
        if (it == s->entries.end()) {
            s->entries.emplace(o.key, RawEntry{o.value, 0, false});
            s->order.push_back(o.key);
        } else {
            it->second.value = o.value;
            it->second.line = 0;
        }
    }
}

// Typed access to one section; remembers which keys were consumed.
class Reader {
public:
    Reader(RawSection& s) : s_(s) {}

    bool has(const std::string& key) const { return s_.entries.count(key) > 0; }

    int line_of(const std::string& key) const
    {
        const auto it = s_.entries.find(key);
        return it == s_.entries.end() ? s_.line : it->second.line;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        throw CaseError(s_.name + "." + key, line_of(key), msg);
    }

    /// For checks that involve several keys of the section.
    [[noreturn]] void fail_section(const std::string& msg) const { throw CaseError(s_.name, s_.line, msg); }

    std::vector<double> numbers(const std::string& key, Dimension dim)
    {
        RawEntry& e = entry(key);
        std::vector<std::string> toks = split_ws(e.value);
        double scale = 1.0;
        double probe = 0.0;
        if (!toks.empty() && !parse_double(toks.back(), probe)) {
            const std::string unit = toks.back();
            const auto info = lookup_unit(unit);
            if (dim == Dimension::none) fail(key, "dimensionless value does not take a unit ('" + unit + "')");
            if (!info) fail(key, "unknown unit '" + unit + "'");
            if (info->dimension != dim)
                fail(key, std::string("unit mismatch: '") + unit + "' is a " + dimension_name(info->dimension) +
                              " unit, expected " + dimension_name(dim));
            scale = info->to_si;
            toks.pop_back();
        }
        if (toks.empty()) fail(key, "missing number");
        std::vector<double> out;
        for (const auto& t : toks) {
            double v = 0.0;
            if (!parse_double(t, v)) fail(key, "expected a number, got '" + t + "'");
            out.push_back(v * scale);
        }
        return out;
    }

    double number(const std::string& key, Dimension dim)
    {
        const auto v = numbers(key, dim);
        if (v.size() != 1) fail(key, "expected a single value");
        return v[0];
    }

    double number(const std::string& key, Dimension dim, double fallback)
    {
        return has(key) ? number(key, dim) : fallback;
    }

    Vec3 vec3(const std::string& key, Dimension dim)
    {
        const auto v = numbers(key, dim);
        if (v.size() != 3) fail(key, "expected three components");
        return {v[0], v[1], v[2]};
    }

    long long integer(const std::string& key)
    {
        RawEntry& e = entry(key);
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
        if (ec != std::errc() || ptr != e.value.data() + e.value.size()) fail(key, "expected an integer, got '" + e.value + "'");
        return v;
    }

    long long integer(const std::string& key, long long fallback) { return has(key) ? integer(key) : fallback; }

    std::uint64_t unsigned64(const std::string& key)
    {
        RawEntry& e = entry(key);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
        if (ec != std::errc() || ptr != e.value.data() + e.value.size()) fail(key, "expected an unsigned integer");
        return v;
    }

    std::string word(const std::string& key) { return entry(key).value; }
    std::string word(const std::string& key, const std::string& fallback) { return has(key) ? word(key) : fallback; }

    bool flag(const std::string& key, bool fallback)
    {
        if (!has(key)) return fallback;
        const std::string v = word(key);
        if (v == "true" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "no" || v == "off") return false;
        fail(key, "expected true or false, got '" + v + "'");
    }

    void finish() const
    {
        for (const auto& k : s_.order)
            if (!s_.entries.at(k).used) fail(k, "unknown key in [" + s_.name + "]");
    }

private:
    RawEntry& entry(const std::string& key)
    {
        auto it = s_.entries.find(key);
        if (it == s_.entries.end()) throw CaseError(s_.name + "." + key, s_.line, "missing mandatory key");
        it->second.used = true;
        return it->second;
    }

    RawSection& s_;
};

Index to_count(Reader& r, const std::string& key, long long v)
{
    if (v < 1 || v > 100000000) r.fail(key, "cell count must be positive");
    return static_cast<Index>(v);
}

void interpret_mesh(Reader r, MeshSpec& m)
{
    const std::string type = r.word("type");
    auto cells = [&] {
        const auto v = r.numbers("cells", Dimension::none);
        if (v.size() != 3) r.fail("cells", "expected three cell counts");
        for (double d : v)
            if (d != std::floor(d)) r.fail("cells", "cell counts must be integers");
        m.nx = to_count(r, "cells", static_cast<long long>(v[0]));
        m.ny = to_count(r, "cells", static_cast<long long>(v[1]));
        m.nz = to_count(r, "cells", static_cast<long long>(v[2]));
    };
    if (type == "box") {
        m.source = MeshSource::box;
        cells();
        m.lower = r.vec3("lower", Dimension::length);
        m.upper = r.vec3("upper", Dimension::length);
        for (int a = 0; a < 3; ++a)
            if (!(m.upper[a] > m.lower[a])) r.fail("upper", "box bounds must be strictly ordered on every axis");
    } else if (type == "vtk") {
        m.source = MeshSource::vtk;
        m.vtk_file = r.word("file");
        m.patch_file = r.word("patches", "");
    } else if (type == "terrain") {
        m.source = MeshSource::terrain;
        cells();
        m.lx = r.number("lx", Dimension::length);
        m.ly = r.number("ly", Dimension::length);
        m.depth = r.number("depth", Dimension::length);
        m.surface.mean = r.number("surface_mean", Dimension::length);
        m.surface.amplitude = r.number("surface_amplitude", Dimension::length, 0.0);
        m.surface.wavelength_x = r.number("wavelength_x", Dimension::length, 0.0);
        m.surface.wavelength_y = r.number("wavelength_y", Dimension::length, 0.0);
        if (!(m.lx > 0.0)) r.fail("lx", "must be positive");
        if (!(m.ly > 0.0)) r.fail("ly", "must be positive");
        if (!(m.depth > 0.0)) r.fail("depth", "must be positive");
        if (!(m.surface.mean - std::abs(m.surface.amplitude) > 0.0))
            r.fail("surface_mean", "surface height must stay positive (mean > |amplitude|)");
    } else {
        r.fail("type", "mesh type must be box, vtk or terrain");
    }
    const long long refine = r.integer("refine", 0);
    if (refine < 0 || refine > 4) r.fail("refine", "refine must be between 0 and 4");
    m.refine = static_cast<int>(refine);
    r.finish();
}

std::vector<std::string> known_patches(const MeshSpec& m)
{
    if (m.source == MeshSource::box) return {"x-", "x+", "y-", "y+", "z-", "z+"};
    if (m.source == MeshSource::terrain) return {"bottom", "top", "x-", "x+", "y-", "y+"};
    return {};
}

BoundarySpec interpret_bc(Reader r, const std::string& patch)
{
    const std::string type = r.word("type");
    BoundarySpec bc;
    if (type == "fixed_head") {
        bc = BoundarySpec::fixed_head(patch, r.number("value", Dimension::length));
    } else if (type == "fixed_velocity") {
        bc = BoundarySpec::fixed_velocity(patch, r.vec3("velocity", Dimension::velocity));
    } else if (type == "zero_flux") {
        bc = BoundarySpec::zero_flux(patch);
    } else {
        r.fail("type", "boundary type must be fixed_head, fixed_velocity or zero_flux");
    }
    r.finish();
    return bc;
}

} // namespace

Override parse_override(std::string_view text)
{
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw CaseError(std::string(text), 0, "override must look like section.key=value");
    const std::string lhs = trim(text.substr(0, eq));
    const auto dot = lhs.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
        throw CaseError(lhs, 0, "override key must look like section.key");
    return {lhs.substr(0, dot), lhs.substr(dot + 1), trim(text.substr(eq + 1))};
}

namespace {

CaseConfig parse_case_impl(std::string_view text, const std::vector<Override>& overrides, const std::string& default_name)
{
    RawCase raw = parse_raw(text);
    apply_overrides(raw, overrides);

    static const char* mandatory[] = {"mesh", "fluid", "vangenuchten", "permeability", "initial", "time"};
    std::string missing;
    for (const char* m : mandatory)
        if (!raw.find(m)) missing += std::string(missing.empty() ? "" : ", ") + "[" + m + "]";
    if (!missing.empty()) throw CaseError("", 0, "missing sections: " + missing);

    CaseConfig cfg;
    interpret_mesh(Reader(*raw.find("mesh")), cfg.mesh);

    {
        Reader r(*raw.find("fluid"));
        cfg.fluid.rho = r.number("rho", Dimension::density);
        cfg.fluid.mu = r.number("mu", Dimension::viscosity);
        if (r.has("gravity")) cfg.fluid.gravity = r.vec3("gravity", Dimension::acceleration);
        try {
            cfg.fluid.validate();
        } catch (const std::invalid_argument& e) {
            r.fail("rho", e.what());
        }
        r.finish();
    }
    {
        Reader r(*raw.find("vangenuchten"));
        cfg.vg.alpha = r.number("alpha", Dimension::inverse_length);
        if (r.has("n") == r.has("m")) r.fail("n", "give exactly one of n or m");
        if (r.has("n")) {
            cfg.vg.n = r.number("n", Dimension::none);
        } else {
            const double m = r.number("m", Dimension::none);
            if (!(m > 0.0 && m < 1.0)) r.fail("m", "m must lie in (0,1)");
            cfg.vg.n = 1.0 / (1.0 - m);
        }
        cfg.vg.theta_r = r.number("theta_r", Dimension::none);
        cfg.vg.theta_s = r.number("theta_s", Dimension::none);
        cfg.vg.kr_exponent = r.number("kr_exponent", Dimension::none, 0.5);
        try {
            cfg.vg.validate();
        } catch (const std::invalid_argument& e) {
            r.fail("alpha", e.what());
        }
        r.finish();
    }
    {
        Reader r(*raw.find("permeability"));
        const std::string type = r.word("type");
        auto& p = cfg.permeability;
        if (type == "uniform") {
            p.source = PermeabilitySource::uniform;
            if (r.has("value") == r.has("ks")) r.fail("value", "give exactly one of value (m2) or ks (m/s)");
            if (r.has("value"))
                p.value = r.number("value", Dimension::permeability);
            else
                p.value = permeability_from_conductivity(r.number("ks", Dimension::velocity), cfg.fluid);
            if (!(p.value > 0.0)) r.fail("value", "permeability must be positive");
        } else if (type == "file") {
            p.source = PermeabilitySource::file;
            p.file = r.word("file");
        } else if (type == "random") {
            p.source = PermeabilitySource::random;
            p.min = r.number("min", Dimension::permeability);
            p.max = r.number("max", Dimension::permeability);
            if (!r.has("seed")) r.fail("seed", "random permeability requires an explicit seed");
            p.seed = r.unsigned64("seed");
            if (!(p.min > 0.0 && p.min <= p.max)) r.fail("min", "need 0 < min <= max");
        } else {
            r.fail("type", "permeability type must be uniform, file or random");
        }
        r.finish();
    }
    {
        Reader r(*raw.find("initial"));
        const std::string type = r.word("type");
        if (type == "uniform") {
            cfg.initial.source = InitialSource::uniform;
            cfg.initial.value = r.number("value", Dimension::length);
        } else if (type == "hydrostatic") {
            cfg.initial.source = InitialSource::hydrostatic;
            cfg.initial.value = r.number("total_head", Dimension::length);
        } else if (type == "file") {
            cfg.initial.source = InitialSource::file;
            cfg.initial.file = r.word("file");
        } else {
            r.fail("type", "initial type must be uniform, hydrostatic or file");
        }
        r.finish();
    }
    if (RawSection* s = raw.find("picard")) {
        Reader r(*s);
        auto& p = cfg.picard;
        p.epsilon = r.number("epsilon", Dimension::length, p.epsilon);
        p.n_max_iter = static_cast<int>(r.integer("n_max_iter", p.n_max_iter));
        p.hard_cap_factor = r.number("hard_cap_factor", Dimension::none, p.hard_cap_factor);
        p.relaxation = r.number("relaxation", Dimension::none, p.relaxation);
        p.c_min = r.number("c_min", Dimension::inverse_length, p.c_min);
        const std::string scheme = r.word("scheme", "arithmetic");
        if (scheme == "arithmetic")
            p.scheme = MobilityScheme::arithmetic;
        else if (scheme == "upwind")
            p.scheme = MobilityScheme::upwind;
        else
            r.fail("scheme", "scheme must be arithmetic or upwind");
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            r.fail_section(e.what());
        }
        r.finish();
    }
    {
        Reader r(*raw.find("time"));
        auto& t = cfg.time;
        t.end = r.number("end", Dimension::time);
        if (!(t.end > 0.0)) r.fail("end", "end time must be positive");
        t.adaptive = r.flag("adaptive", true);
        auto& c = t.control;
        c.dt_init = r.number("dt_init", Dimension::time, c.dt_init);
        c.dt_min = r.number("dt_min", Dimension::time, std::min(c.dt_min, c.dt_init));
        c.dt_max = r.number("dt_max", Dimension::time, std::max(c.dt_max, c.dt_init));
        c.n_min_iter = static_cast<int>(r.integer("n_min_iter", c.n_min_iter));
        c.n_stab = static_cast<int>(r.integer("n_stab", c.n_stab));
        c.f_increase = r.number("f_increase", Dimension::none, c.f_increase);
        c.f_decrease = r.number("f_decrease", Dimension::none, c.f_decrease);
        c.max_dt_min_failures = static_cast<int>(r.integer("max_dt_min_failures", c.max_dt_min_failures));
        c.n_max_iter = cfg.picard.n_max_iter;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            r.fail_section(e.what());
        }
        r.finish();
    }
    {
        auto& o = cfg.output;
        o.name = default_name;
        if (RawSection* s = raw.find("output")) {
            Reader r(*s);
            if (r.has("times")) {
                o.times = r.numbers("times", Dimension::time);
                for (std::size_t i = 0; i < o.times.size(); ++i) {
                    if (!(o.times[i] > 0.0)) r.fail("times", "output times must be positive");
                    if (i > 0 && !(o.times[i] > o.times[i - 1])) r.fail("times", "output times must be strictly increasing");
                    if (o.times[i] > cfg.time.end) r.fail("times", "output time beyond the end time");
                }
            }
            o.directory = r.word("directory", o.directory);
            o.name = r.word("name", o.name);
            o.vtk = r.flag("vtk", o.vtk);
            r.finish();
        }
    }

    // Boundary conditions, in file order.
    const std::vector<std::string> patches = known_patches(cfg.mesh);
    for (auto& s : raw.sections) {
        if (s.name.rfind("bc.", 0) != 0) continue;
        const std::string patch = s.name.substr(3);
        if (!patches.empty() && std::find(patches.begin(), patches.end(), patch) == patches.end())
            throw CaseError(s.name, s.line, "no patch named '" + patch + "' on this mesh");
        cfg.bcs.push_back(interpret_bc(Reader(s), patch));
    }
    for (const auto& p : patches) {
        const bool covered = std::any_of(cfg.bcs.begin(), cfg.bcs.end(), [&](const BoundarySpec& b) { return b.patch == p; });
        if (!covered) throw CaseError("bc." + p, 0, "patch '" + p + "' has no boundary condition");
    }
    return cfg;
}

} // namespace

CaseConfig parse_case(std::string_view text, const std::vector<Override>& overrides)
{
    return parse_case_impl(text, overrides, "case");
}

std::string print_case(const CaseConfig& cfg)
{
    std::ostringstream out;
    auto num = [](double v, Dimension d) {
        std::string s = fmt17(v);
        if (d != Dimension::none) s += std::string(" ") + si_unit(d);
        return s;
    };
    auto vec = [&](const Vec3& v, Dimension d) {
        return fmt17(v.x) + " " + fmt17(v.y) + " " + fmt17(v.z) + (d != Dimension::none ? std::string(" ") + si_unit(d) : "");
    };

    const MeshSpec& m = cfg.mesh;
    out << "[mesh]\n";
    switch (m.source) {
    case MeshSource::box:
        out << "type = box\ncells = " << m.nx << ' ' << m.ny << ' ' << m.nz << '\n';
        out << "lower = " << vec(m.lower, Dimension::length) << '\n';
        out << "upper = " << vec(m.upper, Dimension::length) << '\n';
        break;
    case MeshSource::vtk:
        out << "type = vtk\nfile = " << m.vtk_file << '\n';
        if (!m.patch_file.empty()) out << "patches = " << m.patch_file << '\n';
        break;
    case MeshSource::terrain:
        out << "type = terrain\ncells = " << m.nx << ' ' << m.ny << ' ' << m.nz << '\n';
        out << "lx = " << num(m.lx, Dimension::length) << "\nly = " << num(m.ly, Dimension::length) << '\n';
        out << "depth = " << num(m.depth, Dimension::length) << '\n';
        out << "surface_mean = " << num(m.surface.mean, Dimension::length) << '\n';
        out << "surface_amplitude = " << num(m.surface.amplitude, Dimension::length) << '\n';
        out << "wavelength_x = " << num(m.surface.wavelength_x, Dimension::length) << '\n';
        out << "wavelength_y = " << num(m.surface.wavelength_y, Dimension::length) << '\n';
        break;
    }
    out << "refine = " << m.refine << "\n\n";

    out << "[fluid]\nrho = " << num(cfg.fluid.rho, Dimension::density) << "\nmu = " << num(cfg.fluid.mu, Dimension::viscosity)
        << "\ngravity = " << vec(cfg.fluid.gravity, Dimension::acceleration) << "\n\n";

    out << "[vangenuchten]\nalpha = " << num(cfg.vg.alpha, Dimension::inverse_length) << "\nn = " << fmt17(cfg.vg.n)
        << "\ntheta_r = " << fmt17(cfg.vg.theta_r) << "\ntheta_s = " << fmt17(cfg.vg.theta_s)
        << "\nkr_exponent = " << fmt17(cfg.vg.kr_exponent) << "\n\n";

    const auto& p = cfg.permeability;
    out << "[permeability]\n";
    switch (p.source) {
    case PermeabilitySource::uniform: out << "type = uniform\nvalue = " << num(p.value, Dimension::permeability) << '\n'; break;
    case PermeabilitySource::file: out << "type = file\nfile = " << p.file << '\n'; break;
    case PermeabilitySource::random:
        out << "type = random\nmin = " << num(p.min, Dimension::permeability) << "\nmax = "
            << num(p.max, Dimension::permeability) << "\nseed = " << p.seed << '\n';
        break;
    }
    out << '\n';

    for (const auto& bc : cfg.bcs) {
        out << "[bc." << bc.patch << "]\n";
        switch (bc.kind) {
        case BoundaryKind::fixed_head: out << "type = fixed_head\nvalue = " << num(bc.head, Dimension::length) << '\n'; break;
        case BoundaryKind::fixed_velocity:
            out << "type = fixed_velocity\nvelocity = " << vec(bc.velocity, Dimension::velocity) << '\n';
            break;
        case BoundaryKind::zero_flux: out << "type = zero_flux\n"; break;
        }
        out << '\n';
    }

    out << "[initial]\n";
    switch (cfg.initial.source) {
    case InitialSource::uniform: out << "type = uniform\nvalue = " << num(cfg.initial.value, Dimension::length) << '\n'; break;
    case InitialSource::hydrostatic:
        out << "type = hydrostatic\ntotal_head = " << num(cfg.initial.value, Dimension::length) << '\n';
        break;
    case InitialSource::file: out << "type = file\nfile = " << cfg.initial.file << '\n'; break;
    }
    out << '\n';

    const auto& t = cfg.time;
    const auto& c = t.control;
    out << "[time]\nend = " << num(t.end, Dimension::time) << "\nadaptive = " << (t.adaptive ? "true" : "false")
        << "\ndt_init = " << num(c.dt_init, Dimension::time) << "\ndt_min = " << num(c.dt_min, Dimension::time)
        << "\ndt_max = " << num(c.dt_max, Dimension::time) << "\nn_min_iter = " << c.n_min_iter
        << "\nn_stab = " << c.n_stab << "\nf_increase = " << fmt17(c.f_increase)
        << "\nf_decrease = " << fmt17(c.f_decrease) << "\nmax_dt_min_failures = " << c.max_dt_min_failures << "\n\n";

    const auto& pc = cfg.picard;
    out << "[picard]\nepsilon = " << num(pc.epsilon, Dimension::length) << "\nn_max_iter = " << pc.n_max_iter
        << "\nhard_cap_factor = " << fmt17(pc.hard_cap_factor) << "\nrelaxation = " << fmt17(pc.relaxation)
        << "\nscheme = " << (pc.scheme == MobilityScheme::upwind ? "upwind" : "arithmetic")
        << "\nc_min = " << num(pc.c_min, Dimension::inverse_length) << "\n\n";

    const auto& o = cfg.output;
    out << "[output]\n";
    if (!o.times.empty()) {
        out << "times =";
        for (double v : o.times) out << ' ' << fmt17(v);
        out << " s\n";
    }
    out << "directory = " << o.directory << "\nname = " << o.name << "\nvtk = " << (o.vtk ? "true" : "false") << '\n';
    return out.str();
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CaseConfig load_case(const std::filesystem::path& path, const std::vector<Override>& overrides)
{
    const std::string text = read_text_file(path);
    CaseConfig cfg;
    try {
        cfg = parse_case_impl(text, overrides, path.stem().string());
    } catch (const CaseError& e) {
        throw CaseError(e, path.string());
    }
    const auto dir = path.parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (dir / p).lexically_normal().string();
    };
    resolve(cfg.mesh.vtk_file);
    resolve(cfg.mesh.patch_file);
    resolve(cfg.permeability.file);
    resolve(cfg.initial.file);
    return cfg;
}

Mesh build_mesh(const CaseConfig& cfg)
{
    const MeshSpec& m = cfg.mesh;
    Mesh mesh;
    switch (m.source) {
    case MeshSource::box: mesh = build_box_mesh(m.nx, m.ny, m.nz, Bounds{m.lower, m.upper}); break;
    case MeshSource::terrain: mesh = synth_terrain_mesh(m.nx, m.ny, m.nz, m.lx, m.ly, m.surface, m.depth); break;
    case MeshSource::vtk: {
        std::vector<PatchRule> rules;
        if (!m.patch_file.empty()) rules = parse_patch_rules(read_text_file(m.patch_file));
        mesh = read_vtk_legacy(read_text_file(m.vtk_file), rules).mesh;
        break;
    }
    }
    if (m.refine > 0) mesh = refine_uniform(mesh, m.refine);
    return mesh;
}

std::vector<double> random_permeability(Index n_cells, double lo, double hi, std::uint64_t seed)
{
    if (!(lo > 0.0 && lo <= hi)) throw std::invalid_argument("random permeability needs 0 < lo <= hi");
    Xoshiro256ss rng(seed);
    std::vector<double> k(static_cast<std::size_t>(n_cells));
    for (auto& v : k) v = lo + (hi - lo) * rng.uniform();
    return k;
}

std::vector<double> read_cell_values(const std::filesystem::path& path, Index expected)
{
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    std::vector<double> values;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        double v = 0.0;
        if (!parse_double(t, v))
            throw std::runtime_error(path.string() + " line " + std::to_string(lineno) + ": expected a number");
        values.push_back(v);
    }
    if (static_cast<Index>(values.size()) != expected)
        throw std::runtime_error(path.string() + ": " + std::to_string(values.size()) + " values for " +
                                 std::to_string(expected) + " cells");
    return values;
}

std::vector<double> build_permeability(const CaseConfig& cfg, const Mesh& mesh)
{
    const auto& p = cfg.permeability;
    switch (p.source) {
    case PermeabilitySource::uniform: return std::vector<double>(static_cast<std::size_t>(mesh.n_cells()), p.value);
    case PermeabilitySource::random: return random_permeability(mesh.n_cells(), p.min, p.max, p.seed);
    case PermeabilitySource::file: {
        auto k = read_cell_values(p.file, mesh.n_cells());
        for (double v : k)
            if (!(v > 0.0)) throw std::runtime_error(p.file + ": permeability must be positive");
        return k;
    }
    }
    return {};
}

std::vector<double> build_initial_head(const CaseConfig& cfg, const Mesh& mesh)
{
    const auto& init = cfg.initial;
    switch (init.source) {
    case InitialSource::uniform: return std::vector<double>(static_cast<std::size_t>(mesh.n_cells()), init.value);
    case InitialSource::hydrostatic: {
        std::vector<double> h(static_cast<std::size_t>(mesh.n_cells()));
        for (Index c = 0; c < mesh.n_cells(); ++c) h[c] = init.value - elevation(mesh.cell_centroids()[c], cfg.fluid);
        return h;
    }
    case InitialSource::file: return read_cell_values(init.file, mesh.n_cells());
    }
    return {};
}

FlowProblem make_problem(const CaseConfig& cfg, const Mesh& mesh)
{
    FlowProblem problem;
    problem.mesh = &mesh;
    problem.material.permeability = build_permeability(cfg, mesh);
    problem.material.vg = cfg.vg;
    problem.fluid = cfg.fluid;
    problem.bcs = resolve_boundaries(mesh, cfg.bcs);
    return problem;
}

std::string output_filename(const std::string& case_name, double time)
{
    if (!(time >= 0.0) || time >= 1e15) throw std::invalid_argument("output time out of range");
    char buf[64];
    auto whole = static_cast<long long>(std::floor(time));
    long long micro = std::llround((time - static_cast<double>(whole)) * 1e6);
    if (micro == 1000000) {
        ++whole;
        micro = 0;
    }
    // 'p' marks the fraction; it sorts after '.', so t and t + fraction stay in order.
    if (time == std::floor(time))
        std::snprintf(buf, sizeof buf, "%010lld", whole);
    else
        std::snprintf(buf, sizeof buf, "%010lldp%06lld", whole, micro);
    return case_name + "_t" + buf + ".vtk";
}

std::filesystem::path write_vtk_output(const Mesh& mesh, std::span<const double> h, std::span<const double> theta,
                                       std::span<const double> permeability, double time,
                                       const std::filesystem::path& directory, const std::string& case_name)
{
    check_cell_field(mesh, h, "h");
    check_cell_field(mesh, theta, "theta");
    check_cell_field(mesh, permeability, "K");
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + directory.string() + "': " + ec.message());

    CellData data;
    data.names = {"h", "theta", "K"};
    data.values["h"].assign(h.begin(), h.end());
    data.values["theta"].assign(theta.begin(), theta.end());
    data.values["K"].assign(permeability.begin(), permeability.end());

    char title[96];
    std::snprintf(title, sizeof title, "%s t=%.17g s", case_name.c_str(), time);
    const auto path = directory / output_filename(case_name, time);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << write_vtk(mesh, data, title);
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
    return path;
}

std::vector<std::pair<double, double>> extract_profile(const Mesh& mesh, std::span<const double> field, int axis)
{
    if (axis < 0 || axis > 2) throw std::invalid_argument("profile axis must be 0, 1 or 2");
    check_cell_field(mesh, field, "profile field");
    const auto& centres = mesh.cell_centroids();
    std::vector<std::pair<double, double>> cells;
    cells.reserve(field.size());
    double lo = 0.0;
    double hi = 0.0;
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const double x = centres[c][axis];
        cells.emplace_back(x, field[c]);
        lo = c == 0 ? x : std::min(lo, x);
        hi = c == 0 ? x : std::max(hi, x);
    }
    std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const double tol = 1e-9 * std::max(hi - lo, 1e-300);
    std::vector<std::pair<double, double>> rows;
    std::size_t i = 0;
    while (i < cells.size()) {
        std::size_t j = i;
        double sx = 0.0;
        double sv = 0.0;
        while (j < cells.size() && cells[j].first - cells[i].first <= tol) {
            sx += cells[j].first;
            sv += cells[j].second;
            ++j;
        }
        const auto n = static_cast<double>(j - i);
        rows.emplace_back(sx / n, sv / n);
        i = j;
    }
    return rows;
}

std::string profile_csv(const std::vector<std::pair<double, double>>& profile)
{
    std::string out = "coord_m,value\n";
    for (const auto& [x, v] : profile) out += fmt17(x) + "," + fmt17(v) + "\n";
    return out;
}

} // namespace gwflow
