#pragma once

#include <string>
#include <vector>

#include "fbp/grids.hpp"

namespace fbp {

/// On-disk layout. Both start with one line of JSON metadata; binary files
/// follow it with little-endian doubles, CSV files with a column header and
/// one row per sample.
enum class FieldEncoding { Binary, Csv };

FieldEncoding parse_field_encoding(const std::string& name);
std::string to_string(FieldEncoding encoding);
/// ".bin" or ".csv".
std::string extension(FieldEncoding encoding);

enum class FieldKind { Strip, Surface };

struct FieldHeader {
    static constexpr int kVersion = 1;
    FieldKind kind = FieldKind::Strip;
    FieldEncoding encoding = FieldEncoding::Binary;
    int n_dim = 1;
    int points_per_dim = 0;
    double period = 0.0;
    /// Interior y nodes; 0 for surface fields.
    int y_interior = 0;
    double t0 = 0.0;
    double horizon = 0.0;
    int steps = 0;
    double grading = 1.0;
    std::vector<double> times;
};

/// Header describing `field` on `grids`. The level list is taken from the
/// field, so fields on a shortened horizon record their own levels.
FieldHeader strip_header(const StripField& field, const Grids& grids, FieldEncoding encoding);
FieldHeader surface_header(const SurfaceField& field, const Grids& grids, FieldEncoding encoding);

void write_field(const std::string& path, const StripField& field, const Grids& grids, FieldEncoding encoding);
void write_field(const std::string& path, const SurfaceField& field, const Grids& grids, FieldEncoding encoding);

struct LoadedField {
    FieldHeader header;
    StripField strip;     // set for FieldKind::Strip
    SurfaceField surface; // set for FieldKind::Surface
};

/// Reads either encoding; throws DomainError on malformed files.
LoadedField read_field(const std::string& path);

/// Long-format plot data: coordinate columns, then `quantity` and `value`.
class TidyTable {
public:
    explicit TidyTable(std::vector<std::string> coordinates);

    void add(const std::vector<double>& coords, const std::string& quantity, double value);
    int rows() const { return static_cast<int>(quantities_.size()); }
    void write(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> coords_;
    std::vector<std::string> quantities_;
    std::vector<double> values_;
};

}  // namespace fbp
