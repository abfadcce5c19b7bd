#include <cmath>
#include <cstdio>
#include <string>

#include "cp2flow/scenario.hpp"

namespace cp2flow {

namespace {

constexpr double kHalfWidth = 3.0;
constexpr double kPixels = 600.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    return buf;
}

// Viewport coordinates, y up.
double px(double x) { return (x + kHalfWidth) / (2 * kHalfWidth) * kPixels; }
double py(double y) { return (kHalfWidth - y) / (2 * kHalfWidth) * kPixels; }

std::string points_attr(const Polyline& loop) {
    std::string s;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        if (i)
            s += ' ';
        s += num(px(loop[i].real())) + ',' + num(py(loop[i].imag()));
    }
    return s;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const std::vector<ProfileCurve>& curves, const SvgDecorations& deco) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
    s += "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
    if (!deco.title.empty())
        s += "<title>" + escape(deco.title) + "</title>\n";

    for (const auto& region : deco.regions)
        s += "<polygon points=\"" + points_attr(region) + "\" fill=\"#d8e4f0\" stroke=\"none\"/>\n";

    // axes
    s += "<line x1=\"0\" y1=\"300\" x2=\"600\" y2=\"300\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
    s += "<line x1=\"300\" y1=\"0\" x2=\"300\" y2=\"600\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";

    for (const auto& c : deco.circles)
        s += "<circle cx=\"" + num(px(c.center.real())) + "\" cy=\"" + num(py(c.center.imag())) + "\" r=\"" +
             num(c.radius / (2 * kHalfWidth) * kPixels) + "\" " +
             (c.filled ? "fill=\"#f4d0c0\" fill-opacity=\"0.6\" stroke=\"#c06040\" stroke-width=\"0.5\""
                       : "fill=\"none\" stroke=\"#888888\" stroke-width=\"0.5\"") +
             "/>\n";

    // a cone is the union of the lines at axis +- opening/2
    const double reach = 2 * kHalfWidth;
    for (const auto& cone : deco.cones)
        for (double a : {cone.axis + cone.opening / 2, cone.axis - cone.opening / 2}) {
            const PlanarPoint d = std::polar(reach, a);
            s += "<line x1=\"" + num(px(-d.real())) + "\" y1=\"" + num(py(-d.imag())) + "\" x2=\"" +
                 num(px(d.real())) + "\" y2=\"" + num(py(d.imag())) +
                 "\" stroke=\"#6080c0\" stroke-width=\"0.6\" stroke-dasharray=\"4 3\"/>\n";
        }

    for (const auto& curve : curves)
        for (const auto& loop : curve.components)
            s += "<polygon points=\"" + points_attr(loop) + "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

    for (const auto& cone : deco.cones)
        for (const auto& curve : curves)
            for (const auto& hit : cone_intersections(curve, cone).points)
                s += "<circle class=\"crossing\" cx=\"" + num(px(hit.point.real())) + "\" cy=\"" +
                     num(py(hit.point.imag())) + "\" r=\"2.5\" fill=\"#c03030\"/>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace cp2flow
