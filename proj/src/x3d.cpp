#include "voxfield/x3d.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace voxfield::x3d {

void ColorMapSpec::validate() const {
    if (v_min && v_max && !(*v_max > *v_min)) {
        throw InputError("colormap: v_max must be > v_min");
    }
    if ((v_min && !v_max) || (v_max && !v_min)) {
        throw InputError("colormap: v_min and v_max must be set together");
    }
    for (double t : {transparency, transparency_min, transparency_max}) {
        if (!(t >= 0.0 && t <= 1.0)) throw InputError("colormap: transparency values must lie in [0,1]");
    }
    if (transparency_min > transparency_max) {
        throw InputError("colormap: transparency_min must be <= transparency_max");
    }
}

Rgb map_color(double v_normalized) {
    const double v = std::clamp(v_normalized, 0.0, 1.0);
    return Rgb{v, 0.0, 1.0 - v};
}

NormalizedVolume normalize_volume(const VolumeGrid& volume, const ColorMapSpec& spec) {
    spec.validate();
    for (double v : volume.values) {
        if (!std::isfinite(v)) throw InputError("volume has non-finite values");
    }
    NormalizedVolume out;
    double lo, hi;
    if (spec.v_min) {
        lo = *spec.v_min;
        hi = *spec.v_max;
    } else {
        lo = volume.min_value();
        hi = volume.max_value();
    }
    out.values.resize(volume.values.size());
    if (hi == lo) {
        std::fill(out.values.begin(), out.values.end(), 0.5);
        out.used_min = lo - 0.5;
        out.used_max = lo + 0.5;
        return out;
    }
    out.used_min = lo;
    out.used_max = hi;
    const double inv = 1.0 / (hi - lo);
    for (size_t i = 0; i < volume.values.size(); ++i) {
        out.values[i] = std::clamp((volume.values[i] - lo) * inv, 0.0, 1.0);
    }
    return out;
}

namespace {

void append_f6(std::string& s, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    s += buf;
}

} // namespace

X3DDocument emit_x3d(const VolumeGrid& volume, const ColorMapSpec& spec) {
    const int n = volume.n;
    if (n < 2) throw InputError("x3d emission needs grid side >= 2");
    const NormalizedVolume norm = normalize_volume(volume, spec);

    const double box_edge = 0.9 / (n - 1);
    const double spacing = 1.0 / (n - 1);

    X3DDocument doc;
    doc.source_grid_n = n;
    std::string& s = doc.text;
    s.reserve(static_cast<size_t>(n) * n * n * 220 + 256);
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<X3D profile=\"Interchange\" version=\"3.3\">\n";
    s += "  <Scene>\n";

    size_t idx = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i, ++idx) {
                const double v = norm.values[idx];
                const Rgb rgb = map_color(v);
                double t = spec.transparency;
                if (spec.transparency_mode == ColorMapSpec::TransparencyMode::ValueWeighted) {
                    t = spec.transparency_max - (spec.transparency_max - spec.transparency_min) * v;
                }
                s += "    <Transform translation=\"";
                append_f6(s, i * spacing);
                s += ' ';
                append_f6(s, j * spacing);
                s += ' ';
                append_f6(s, k * spacing);
                s += "\">\n      <Shape>\n        <Appearance>\n          <Material diffuseColor=\"";
                append_f6(s, rgb.r);
                s += ' ';
                append_f6(s, rgb.g);
                s += ' ';
                append_f6(s, rgb.b);
                s += "\" transparency=\"";
                append_f6(s, t);
                s += "\"/>\n        </Appearance>\n        <Box size=\"";
                append_f6(s, box_edge);
                s += ' ';
                append_f6(s, box_edge);
                s += ' ';
                append_f6(s, box_edge);
                s += "\"/>\n      </Shape>\n    </Transform>\n";
                ++doc.shape_count;
            }

    s += "  </Scene>\n";
    s += "</X3D>\n";
    return doc;
}

std::string emit_html_wrapper(const X3DDocument& doc, const std::string& title) {
    const std::string& t = title.empty() ? std::string("voxfield scene") : title;
    // Drop the XML prolog; the X3D element itself goes into the page verbatim.
    std::string body = doc.text;
    if (body.rfind("<?xml", 0) == 0) {
        const size_t eol = body.find('\n');
        if (eol != std::string::npos) body.erase(0, eol + 1);
    }
    std::string html;
    html.reserve(body.size() + 1024);
    html += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\"/>\n<title>";
    html += t;
    html += "</title>\n";
    html += "<script src=\"https://www.x3dom.org/download/x3dom.js\"></script>\n";
    html += "<link rel=\"stylesheet\" href=\"https://www.x3dom.org/download/x3dom.css\"/>\n";
    html += "</head>\n<body>\n<h1>";
    html += t;
    html += "</h1>\n";
    html += body;
    html += "</body>\n</html>\n";
    return html;
}

} // namespace voxfield::x3d
