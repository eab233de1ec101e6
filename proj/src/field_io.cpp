#include "fbp/field_io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "fbp/error.hpp"

namespace fbp {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary fields assume a little-endian host");

// Shortest text that reads back to the same double.
std::string number(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

json to_json(const FieldHeader& h) {
    json j;
    j["format"] = "fbp-field";
    j["version"] = FieldHeader::kVersion;
    j["kind"] = h.kind == FieldKind::Strip ? "strip" : "surface";
    j["encoding"] = to_string(h.encoding);
    j["dims"] = h.n_dim;
    j["counts"] = {{"x_per_dim", h.points_per_dim},
                   {"x_total", h.n_dim == 1 ? h.points_per_dim : h.points_per_dim * h.points_per_dim},
                   {"y_nodes", h.kind == FieldKind::Strip ? h.y_interior + 2 : 0},
                   {"levels", h.times.size()}};
    j["L"] = h.period;
    j["y_interior"] = h.y_interior;
    j["t0"] = h.t0;
    j["T"] = h.horizon;
    j["N"] = h.steps;
    j["q"] = h.grading;
    j["times"] = h.times;
    j["layout"] = h.kind == FieldKind::Strip ? "per level: u(x, y), x index fastest"
                                             : "per level: s[x] then s_dot[x]";
    return j;
}

FieldHeader from_json(const json& j) {
    if (j.value("format", "") != "fbp-field") throw DomainError("read_field: not a field file");
    if (j.value("version", 0) != FieldHeader::kVersion) throw DomainError("read_field: unsupported version");
    FieldHeader h;
    h.kind = j.at("kind") == "strip" ? FieldKind::Strip : FieldKind::Surface;
    h.encoding = parse_field_encoding(j.at("encoding"));
    h.n_dim = j.at("dims");
    h.points_per_dim = j.at("counts").at("x_per_dim");
    h.period = j.at("L");
    h.y_interior = j.at("y_interior");
    h.t0 = j.at("t0");
    h.horizon = j.at("T");
    h.steps = j.at("N");
    h.grading = j.at("q");
    h.times = j.at("times").get<std::vector<double>>();
    return h;
}

FieldHeader base_header(const Grids& grids, const std::vector<double>& times, FieldEncoding encoding) {
    FieldHeader h;
    h.encoding = encoding;
    h.n_dim = grids.x.n_dim();
    h.points_per_dim = grids.x.points_per_dim();
    h.period = grids.x.period();
    h.t0 = grids.time.t0();
    h.horizon = grids.time.horizon();
    h.steps = grids.time.steps();
    h.grading = grids.time.grading();
    h.times = times;
    return h;
}

std::ofstream open_out(const std::string& path, const FieldHeader& h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open " + path + " for writing");
    out << to_json(h).dump() << '\n';
    return out;
}

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, std::size_t n, const std::string& path) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw DomainError("read_field: " + path + " is truncated");
}

std::string x_columns(int n_dim) { return n_dim == 1 ? "x" : "x1,x2"; }

std::string x_values(const XGrid& x, int i) {
    const Point p = x.point(i);
    return x.n_dim() == 1 ? number(p[0]) : number(p[0]) + "," + number(p[1]);
}

void check_finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw DomainError("write failed: " + path);
}

}  // namespace

FieldEncoding parse_field_encoding(const std::string& name) {
    if (name == "binary" || name == "bin") return FieldEncoding::Binary;
    if (name == "csv") return FieldEncoding::Csv;
    throw DomainError("unknown field format '" + name + "' (expected binary or csv)");
}

std::string to_string(FieldEncoding encoding) { return encoding == FieldEncoding::Binary ? "binary" : "csv"; }

std::string extension(FieldEncoding encoding) { return encoding == FieldEncoding::Binary ? ".bin" : ".csv"; }

FieldHeader strip_header(const StripField& field, const Grids& grids, FieldEncoding encoding) {
    FieldHeader h = base_header(grids, field.times, encoding);
    h.kind = FieldKind::Strip;
    h.y_interior = grids.y.interior();
    return h;
}

FieldHeader surface_header(const SurfaceField& field, const Grids& grids, FieldEncoding encoding) {
    FieldHeader h = base_header(grids, field.times, encoding);
    h.kind = FieldKind::Surface;
    return h;
}

void write_field(const std::string& path, const StripField& field, const Grids& grids, FieldEncoding encoding) {
    require(static_cast<int>(field.times.size()) == field.levels(), "write_field: times and slices differ");
    const FieldHeader h = strip_header(field, grids, encoding);
    std::ofstream out = open_out(path, h);
    for (const Slice& s : field.slices)
        require(s.rows() == grids.x.size() && s.cols() == grids.y.nodes(), "write_field: slice shape mismatch");
    if (encoding == FieldEncoding::Binary) {
        for (const Slice& s : field.slices) write_doubles(out, s.data(), static_cast<std::size_t>(s.size()));
    } else {
        out << "level,t,point,node," << x_columns(h.n_dim) << ",y,u\n";
        for (int k = 0; k < field.levels(); ++k)
            for (int j = 0; j < grids.y.nodes(); ++j)
                for (int i = 0; i < grids.x.size(); ++i)
                    out << k << ',' << number(field.times[k]) << ',' << i << ',' << j << ',' << x_values(grids.x, i)
                        << ',' << number(grids.y.node(j)) << ',' << number(field.slices[k](i, j)) << '\n';
    }
    check_finish(out, path);
}

void write_field(const std::string& path, const SurfaceField& field, const Grids& grids, FieldEncoding encoding) {
    require(static_cast<int>(field.times.size()) == field.levels() &&
                static_cast<int>(field.dot_values.size()) == field.levels(),
            "write_field: times, values and rates differ in length");
    const FieldHeader h = surface_header(field, grids, encoding);
    std::ofstream out = open_out(path, h);
    for (int k = 0; k < field.levels(); ++k)
        require(field.values[k].size() == grids.x.size() && field.dot_values[k].size() == grids.x.size(),
                "write_field: surface shape mismatch");
    if (encoding == FieldEncoding::Binary) {
        for (int k = 0; k < field.levels(); ++k) {
            write_doubles(out, field.values[k].data(), static_cast<std::size_t>(grids.x.size()));
            write_doubles(out, field.dot_values[k].data(), static_cast<std::size_t>(grids.x.size()));
        }
    } else {
        out << "level,t,point," << x_columns(h.n_dim) << ",s,s_dot\n";
        for (int k = 0; k < field.levels(); ++k)
            for (int i = 0; i < grids.x.size(); ++i)
                out << k << ',' << number(field.times[k]) << ',' << i << ',' << x_values(grids.x, i) << ','
                    << number(field.values[k][i]) << ',' << number(field.dot_values[k][i]) << '\n';
    }
    check_finish(out, path);
}

LoadedField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DomainError("read_field: " + path + " is empty");
    LoadedField loaded;
    try {
        loaded.header = from_json(json::parse(line));
    } catch (const json::exception& e) {
        throw DomainError("read_field: bad header in " + path + ": " + e.what());
    }
    const FieldHeader& h = loaded.header;
    require(h.n_dim == 1 || h.n_dim == 2, "read_field: dims must be 1 or 2");
    require(h.points_per_dim > 0, "read_field: empty grid");
    const int points = h.n_dim == 1 ? h.points_per_dim : h.points_per_dim * h.points_per_dim;
    const int nodes = h.y_interior + 2;
    const int levels = static_cast<int>(h.times.size());

    if (h.kind == FieldKind::Strip) {
        loaded.strip.times = h.times;
        loaded.strip.slices.assign(levels, Slice::Zero(points, nodes));
    } else {
        loaded.surface.times = h.times;
        loaded.surface.values.assign(levels, Eigen::VectorXd::Zero(points));
        loaded.surface.dot_values.assign(levels, Eigen::VectorXd::Zero(points));
    }

    if (h.encoding == FieldEncoding::Binary) {
        for (int k = 0; k < levels; ++k) {
            if (h.kind == FieldKind::Strip) {
                Slice& s = loaded.strip.slices[k];
                read_doubles(in, s.data(), static_cast<std::size_t>(s.size()), path);
            } else {
                read_doubles(in, loaded.surface.values[k].data(), points, path);
                read_doubles(in, loaded.surface.dot_values[k].data(), points, path);
            }
        }
        return loaded;
    }

    std::getline(in, line);  // column names
    const std::size_t expected = h.kind == FieldKind::Strip ? static_cast<std::size_t>(levels) * points * nodes
                                                            : static_cast<std::size_t>(levels) * points;
    std::size_t rows = 0;
    int line_no = 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        const std::size_t width = (h.kind == FieldKind::Strip ? 6 : 5) + h.n_dim;
        if (cells.size() != width)
            throw DomainError("read_field: " + path + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(width) + " columns");
        try {
            const int k = std::stoi(cells[0]);
            const int i = std::stoi(cells[2]);
            require(k >= 0 && k < levels && i >= 0 && i < points, "index out of range");
            if (h.kind == FieldKind::Strip) {
                const int j = std::stoi(cells[3]);
                require(j >= 0 && j < nodes, "node out of range");
                loaded.strip.slices[k](i, j) = std::stod(cells.back());
            } else {
                loaded.surface.values[k][i] = std::stod(cells[width - 2]);
                loaded.surface.dot_values[k][i] = std::stod(cells[width - 1]);
            }
        } catch (const std::exception& e) {
            throw DomainError("read_field: " + path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        ++rows;
    }
    if (rows != expected)
        throw DomainError("read_field: " + path + " has " + std::to_string(rows) + " rows, expected " +
                          std::to_string(expected));
    return loaded;
}

TidyTable::TidyTable(std::vector<std::string> coordinates) : columns_(std::move(coordinates)) {}

void TidyTable::add(const std::vector<double>& coords, const std::string& quantity, double value) {
    require(coords.size() == columns_.size(), "TidyTable: coordinate count mismatch");
    coords_.push_back(coords);
    quantities_.push_back(quantity);
    values_.push_back(value);
}

void TidyTable::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot open " + path + " for writing");
    for (const std::string& c : columns_) out << c << ',';
    out << "quantity,value\n";
    for (std::size_t r = 0; r < values_.size(); ++r) {
        for (double c : coords_[r]) out << number(c) << ',';
        out << quantities_[r] << ',' << number(values_[r]) << '\n';
    }
    check_finish(out, path);
}

}  // namespace fbp
