#include "gwflow/vtk_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace gwflow {

namespace {

class Tokenizer {
public:
    explicit Tokenizer(std::string_view text) : text_(text) {}

    bool next(std::string_view& token)
    {
        skip_space();
        if (pos_ >= text_.size()) return false;
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
        token = text_.substr(start, pos_ - start);
        token_line_ = line_;
        return true;
    }

    std::string_view expect(const char* what)
    {
        std::string_view token;
        if (!next(token)) fail(std::string("unexpected end of file, expected ") + what);
        return token;
    }

    /// Remainder of the current line, trimmed.
    std::string_view rest_of_line()
    {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        std::string_view s = text_.substr(start, pos_ - start);
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        token_line_ = line_;
        if (pos_ < text_.size()) {
            ++pos_;
            ++line_;
        }
        return s;
    }

    template <class T>
    T number(const char* what)
    {
        const std::string_view tok = expect(what);
        T value{};
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc() || ptr != tok.data() + tok.size())
            fail(std::string("expected ") + what + ", got '" + std::string(tok) + "'");
        return value;
    }

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw MeshError("VTK line " + std::to_string(token_line_) + ": " + msg);
    }

    int line() const { return token_line_; }

private:
    static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

    void skip_space()
    {
        while (pos_ < text_.size() && is_space(text_[pos_])) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int token_line_ = 1;
};

std::string upper(std::string_view s)
{
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string fmt17(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::vector<PatchRule> parse_patch_rules(std::string_view text)
{
    std::vector<PatchRule> rules;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        PatchRule rule;
        std::string kind;
        if (!(ls >> rule.name)) continue;
        auto fail = [&](const std::string& msg) -> void {
            throw MeshError("patch file line " + std::to_string(lineno) + ": " + msg);
        };
        if (!(ls >> kind)) fail("missing rule kind after '" + rule.name + "'");
        if (kind == "remaining") {
            rule.remaining = true;
        } else if (kind == "plane") {
            bool has_axis = false;
            bool has_value = false;
            bool has_tol = false;
            std::string kv;
            while (ls >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) fail("expected key=value, got '" + kv + "'");
                const std::string key = kv.substr(0, eq);
                const std::string val = kv.substr(eq + 1);
                if (key == "axis") {
                    if (val != "x" && val != "y" && val != "z") fail("axis must be x, y or z");
                    rule.axis = val[0] - 'x';
                    has_axis = true;
                } else if (key == "value" || key == "tol") {
                    double d = 0.0;
                    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), d);
                    if (ec != std::errc() || ptr != val.data() + val.size()) fail("bad number '" + val + "'");
                    (key == "value" ? rule.value : rule.tol) = d;
                    (key == "value" ? has_value : has_tol) = true;
                } else {
                    fail("unknown key '" + key + "'");
                }
            }
            if (!has_axis || !has_value || !has_tol) fail("plane rule needs axis=, value= and tol=");
            if (rule.tol < 0.0) fail("tol must be non-negative");
        } else {
            fail("unknown rule kind '" + kind + "'");
        }
        rules.push_back(rule);
    }
    return rules;
}

VtkDataset read_vtk_legacy(std::string_view text, const std::vector<PatchRule>& rules)
{
    Tokenizer tok(text);

    const std::string_view header = tok.rest_of_line();
    if (header.rfind("# vtk DataFile Version", 0) != 0) tok.fail("missing '# vtk DataFile Version' header");
    {
        std::string_view version = header.substr(std::string_view("# vtk DataFile Version").size());
        while (!version.empty() && version.front() == ' ') version.remove_prefix(1);
        if (version.empty() || (version[0] != '2' && version[0] != '3' && version[0] != '4'))
            tok.fail("unsupported legacy VTK version '" + std::string(version) + "'");
    }
    tok.rest_of_line(); // title
    if (upper(tok.rest_of_line()) != "ASCII") tok.fail("only ASCII legacy VTK is supported");
    if (upper(tok.expect("DATASET")) != "DATASET") tok.fail("expected DATASET");
    if (upper(tok.expect("dataset type")) != "UNSTRUCTURED_GRID") tok.fail("only UNSTRUCTURED_GRID is supported");

    std::vector<Vec3> points;
    std::vector<std::vector<Index>> cells;
    std::vector<CellKind> kinds;
    bool have_points = false;
    bool have_cells = false;
    bool have_types = false;
    CellData data;
    Index n_cell_data = -1;

    std::string_view keyword;
    while (tok.next(keyword)) {
        const std::string kw = upper(keyword);
        if (kw == "POINTS") {
            const auto n = tok.number<Index>("point count");
            const std::string type = upper(tok.expect("point data type"));
            if (type != "FLOAT" && type != "DOUBLE") tok.fail("unsupported POINTS data type '" + type + "'");
            if (n < 0) tok.fail("negative point count");
            points.resize(static_cast<std::size_t>(n));
            for (auto& p : points) {
                p.x = tok.number<double>("point coordinate");
                p.y = tok.number<double>("point coordinate");
                p.z = tok.number<double>("point coordinate");
            }
            have_points = true;
        } else if (kw == "CELLS") {
            const auto n = tok.number<Index>("cell count");
            const auto size = tok.number<std::int64_t>("cell list size");
            const int decl_line = tok.line();
            if (n < 0) tok.fail("negative cell count");
            cells.resize(static_cast<std::size_t>(n));
            std::int64_t consumed = 0;
            for (auto& cell : cells) {
                const auto npts = tok.number<Index>("cell point count");
                if (npts < 1) tok.fail("cell with no points");
                cell.resize(static_cast<std::size_t>(npts));
                for (auto& id : cell) {
                    id = tok.number<Index>("point index");
                    if (have_points && (id < 0 || id >= static_cast<Index>(points.size())))
                        tok.fail("point index " + std::to_string(id) + " out of range");
                }
                consumed += npts + 1;
            }
            if (consumed != size)
                throw MeshError("VTK line " + std::to_string(decl_line) + ": CELLS declares list size " +
                                std::to_string(size) + " but the cells use " + std::to_string(consumed));
            have_cells = true;
        } else if (kw == "CELL_TYPES") {
            const auto n = tok.number<Index>("cell type count");
            if (!have_cells) tok.fail("CELL_TYPES before CELLS");
            if (n != static_cast<Index>(cells.size()))
                tok.fail("CELL_TYPES count " + std::to_string(n) + " does not match CELLS count " +
                         std::to_string(cells.size()));
            kinds.resize(static_cast<std::size_t>(n));
            for (std::size_t c = 0; c < kinds.size(); ++c) {
                const int code = tok.number<int>("cell type");
                try {
                    kinds[c] = cell_kind_from_vtk(code);
                } catch (const MeshError& e) {
                    tok.fail(e.what());
                }
                if (static_cast<int>(cells[c].size()) != points_per_cell(kinds[c]))
                    tok.fail("cell " + std::to_string(c) + " of type " + std::to_string(code) + " has " +
                             std::to_string(cells[c].size()) + " points");
            }
            have_types = true;
        } else if (kw == "CELL_DATA") {
            n_cell_data = tok.number<Index>("cell data count");
            if (have_cells && n_cell_data != static_cast<Index>(cells.size()))
                tok.fail("CELL_DATA count does not match cell count");
        } else if (kw == "SCALARS") {
            if (n_cell_data < 0) tok.fail("SCALARS outside CELL_DATA");
            const std::string name(tok.expect("scalar name"));
            const std::string type = upper(tok.expect("scalar type"));
            if (type != "FLOAT" && type != "DOUBLE") tok.fail("unsupported SCALARS type '" + type + "'");
            std::string_view maybe = tok.rest_of_line();
            if (!maybe.empty() && maybe != "1") tok.fail("only single-component SCALARS are supported");
            if (upper(tok.expect("LOOKUP_TABLE")) != "LOOKUP_TABLE") tok.fail("expected LOOKUP_TABLE");
            tok.expect("lookup table name");
            std::vector<double> values(static_cast<std::size_t>(n_cell_data));
            for (auto& v : values) v = tok.number<double>("scalar value");
            if (data.values.count(name)) tok.fail("duplicate SCALARS '" + name + "'");
            data.names.push_back(name);
            data.values.emplace(name, std::move(values));
        } else {
            tok.fail("unsupported section '" + std::string(keyword) + "'");
        }
    }
    if (!have_points) tok.fail("missing POINTS section");
    if (!have_cells) tok.fail("missing CELLS section");
    if (!have_types) tok.fail("missing CELL_TYPES section");

    std::vector<Index> conn;
    for (const auto& c : cells) conn.insert(conn.end(), c.begin(), c.end());

    std::vector<std::string> names;
    for (const auto& r : rules) names.push_back(r.name);
    // Rules may share a name; map each rule to its first occurrence.
    std::vector<std::size_t> rule_patch(rules.size());
    {
        std::vector<std::string> unique;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            std::size_t j = 0;
            while (j < unique.size() && unique[j] != rules[i].name) ++j;
            if (j == unique.size()) unique.push_back(rules[i].name);
            rule_patch[i] = j;
        }
        names = unique;
    }
    const std::size_t fallback = names.size();
    names.push_back("boundary");

    auto classify = [&](const BoundaryFace& face) -> std::size_t {
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const auto& r = rules[i];
            if (r.remaining || std::abs(face.centroid[r.axis] - r.value) <= r.tol) return rule_patch[i];
        }
        return fallback;
    };
    Mesh mesh = Mesh::from_cells(std::move(points), std::move(kinds), std::move(conn), names, classify,
                                 rules.empty() ? std::string{} : std::string("boundary"));
    return {std::move(mesh), std::move(data)};
}

std::string write_vtk(const Mesh& mesh, const CellData& data, const std::string& title)
{
    std::string out;
    out.reserve(static_cast<std::size_t>(mesh.n_points()) * 60 + static_cast<std::size_t>(mesh.n_cells()) * 60);
    out += "# vtk DataFile Version 3.0\n";
    out += title.empty() ? std::string("gwflow") : title;
    out += "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += "POINTS " + std::to_string(mesh.n_points()) + " double\n";
    for (const Vec3& p : mesh.points()) out += fmt17(p.x) + ' ' + fmt17(p.y) + ' ' + fmt17(p.z) + '\n';

    std::int64_t size = 0;
    for (Index c = 0; c < mesh.n_cells(); ++c) size += 1 + static_cast<std::int64_t>(mesh.cell_points(c).size());
    out += "\nCELLS " + std::to_string(mesh.n_cells()) + ' ' + std::to_string(size) + '\n';
    for (Index c = 0; c < mesh.n_cells(); ++c) {
        const auto ids = mesh.cell_points(c);
        out += std::to_string(ids.size());
        for (Index id : ids) out += ' ' + std::to_string(id);
        out += '\n';
    }
    out += "\nCELL_TYPES " + std::to_string(mesh.n_cells()) + '\n';
    for (CellKind k : mesh.cell_kinds()) out += std::to_string(vtk_type_code(k)) + '\n';

    if (!data.names.empty()) {
        out += "\nCELL_DATA " + std::to_string(mesh.n_cells()) + '\n';
        for (const auto& name : data.names) {
            const auto& values = data.values.at(name);
            if (static_cast<Index>(values.size()) != mesh.n_cells())
                throw MeshError("cell data '" + name + "' has wrong length");
            out += "SCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
            for (double v : values) out += fmt17(v) + '\n';
        }
    }
    return out;
}

} // namespace gwflow
