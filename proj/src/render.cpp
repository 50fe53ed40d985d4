#include "maskit2/render.hpp"

#include <cctype>
#include <cstdio>

namespace maskit2 {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string chord(const Point& a, const Point& b, const std::string& cls,
                  const std::string& id) {
    std::string s = "  <path";
    if (!id.empty()) s += " id=\"" + id + "\"";
    s += " class=\"" + cls + "\" d=\"M " + num(a.kx()) + " " + num(a.ky()) +
         " L " + num(b.kx()) + " " + num(b.ky()) + "\"/>\n";
    return s;
}

} // namespace

std::string render_svg(const Holonomy& h, const std::vector<ArcLabel>& arcs) {
    Tessellation tess(h);
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" "
           "height=\"600\" viewBox=\"-1.1 -1.1 2.2 2.2\">\n";
    out += "  <style>path{fill:none;stroke-linecap:round}"
           ".tile{stroke:#000000;stroke-width:0.004}"
           ".necklace{stroke:#000000;stroke-width:0.016}"
           ".arc{stroke:#999999;stroke-width:0.012}</style>\n";
    out += "  <circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#000000\" "
           "stroke-width=\"0.004\"/>\n";
    const Tile& co = tess.hbar_base();
    for (int i = 0; i < 6; ++i)
        out += chord(co.vertices[i], co.vertices[(i + 1) % 6], "tile",
                     "cotile-" + std::to_string(i + 1));
    for (int i = 0; i < 6; ++i)
        out += chord(h.w[i], h.w[(i + 1) % 6], "necklace",
                     "necklace-" + std::to_string(i + 1));
    for (const ArcLabel& label : arcs) {
        ArcInstance inst = tess.develop(label, 0);
        std::string id = "arc-" + to_string(label);
        for (char& c : id)
            if (!std::isalnum((unsigned char)c) && c != '-') c = '_';
        out += chord(h.w[inst.label.j - 1], inst.endpoint_lift, "arc", id);
    }
    out += "</svg>\n";
    return out;
}

} // namespace maskit2
