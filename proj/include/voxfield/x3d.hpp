#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voxfield/solver.hpp"

namespace voxfield::x3d {

enum class ColorMode { BlueRed };

struct ColorMapSpec {
    std::optional<double> v_min; // unset => per-snapshot auto range
    std::optional<double> v_max;
    ColorMode mode = ColorMode::BlueRed;

    enum class TransparencyMode { Constant, ValueWeighted };
    TransparencyMode transparency_mode = TransparencyMode::Constant;
    double transparency = 0.85;      // Constant
    double transparency_min = 0.3;   // ValueWeighted: most opaque (hottest) voxel
    double transparency_max = 0.9;   // ValueWeighted: most transparent (coldest) voxel

    void validate() const;
};

struct Rgb {
    double r = 0.0, g = 0.0, b = 0.0;
};

/// BlueRed: r = v, g = 0, b = 1 - v, input clamped to [0,1] first.
Rgb map_color(double v_normalized);

struct NormalizedVolume {
    std::vector<double> values; // clamped to [0,1], same node order as the volume
    double used_min = 0.0;
    double used_max = 1.0;
};

/// Affine normalization against the requested range or the volume's own.
/// A degenerate range (max == min) maps everything to 0.5 and reports the
/// used range as (value - 0.5, value + 0.5).
NormalizedVolume normalize_volume(const VolumeGrid& volume, const ColorMapSpec& spec);

struct X3DDocument {
    std::string text;
    long shape_count = 0;
    int source_grid_n = 0;
};

/// One semitransparent Box per grid node, colored by the value colormap.
/// Voxels are emitted in (k,j,i) order with i fastest; every numeric
/// attribute is printed with exactly 6 decimals, so output is byte-identical
/// for identical inputs.
X3DDocument emit_x3d(const VolumeGrid& volume, const ColorMapSpec& spec);

/// Static HTML page embedding the scene for an X3D-capable web renderer.
/// Empty title falls back to "voxfield scene".
std::string emit_html_wrapper(const X3DDocument& doc, const std::string& title);

} // namespace voxfield::x3d
