#include "hetmap/render.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <vector>

namespace hetmap {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

const char* kind_shape(NodeKind k) {
    switch (k) {
        case NodeKind::Source: return "invtriangle";
        case NodeKind::Sink: return "triangle";
        case NodeKind::InputMem: return "box";
        case NodeKind::OutputMem: return "box3d";
        case NodeKind::Compute: return "ellipse";
    }
    return "ellipse";
}

// palette shared by DOT fills and Gantt accents
const char* kPalette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072",
                          "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
                          "#d9d9d9", "#bc80bd"};
constexpr int kPaletteSize = 10;

const char* event_color(EventKind k) {
    switch (k) {
        case EventKind::Compute: return "#4c78a8";
        case EventKind::Read: return "#72b7b2";
        case EventKind::Write: return "#eeca3b";
        case EventKind::Transfer: return "#f58518";
    }
    return "#4c78a8";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string render_dot(const AppGraph& g, const Mapping* mapping) {
    // deterministic unit -> color assignment in unit-name order
    std::map<std::string, int> unit_color;
    if (mapping) {
        std::set<std::string> units;
        for (const auto& [node, unit] : mapping->at) units.insert(unit);
        int next = 0;
        for (const std::string& u : units) unit_color[u] = next++ % kPaletteSize;
    }

    std::string out = "digraph app {\n  rankdir=TB;\n";
    for (const Node& n : g.nodes) {
        std::string label;
        switch (n.kind) {
            case NodeKind::Source:
                label = "source " + std::to_string(n.id);
                break;
            case NodeKind::Sink:
                label = "sink " + std::to_string(n.id);
                break;
            case NodeKind::Compute:
                label = "t" + std::to_string(n.id) + "\\np=" +
                        fmt("%.3g", n.attrs ? n.attrs->parallelizability : 0.0) +
                        " c=" + fmt("%.3g", n.attrs ? n.attrs->complexity : 0.0);
                break;
            case NodeKind::InputMem:
                label = "in " + std::to_string(n.id);
                break;
            case NodeKind::OutputMem:
                label = "out " + std::to_string(n.id);
                break;
        }
        out += "  n" + std::to_string(n.id) + " [shape=" +
               kind_shape(n.kind) + ", label=\"" + label + "\"";
        if (mapping) {
            auto it = mapping->at.find(n.id);
            if (it != mapping->at.end()) {
                out += ", style=filled, fillcolor=\"" +
                       std::string(kPalette[unit_color[it->second]]) +
                       "\", tooltip=\"" + it->second + "\"";
            }
        }
        out += "];\n";
    }
    for (const auto& [u, v] : g.edges)
        out += "  n" + std::to_string(u) + " -> n" + std::to_string(v) + ";\n";
    out += "}\n";
    return out;
}

std::string render_gantt(const Timeline& tl, double makespan) {
    // lanes: every unit seen in clocks or events, procs cannot be
    // distinguished here, so order lexicographically for determinism
    std::set<std::string> unit_set;
    for (const auto& [unit, t] : tl.clocks) unit_set.insert(unit);
    for (const Event& e : tl.events) unit_set.insert(e.unit);
    std::vector<std::string> units(unit_set.begin(), unit_set.end());

    const double label_w = 130.0, plot_w = 860.0, row_h = 30.0, bar_h = 20.0;
    const double top = 36.0;
    double height = top + row_h * static_cast<double>(units.size()) + 30.0;
    double span = makespan > 0.0 && !is_inf(makespan) ? makespan : 1.0;
    auto xpos = [&](double t) { return label_w + t / span * plot_w; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1010\" height=\"" +
           fmt("%.6g", height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"1010\" height=\"" +
           fmt("%.6g", height) + "\" fill=\"white\"/>\n";
    svg += "<text x=\"8\" y=\"18\" font-size=\"13\">makespan " +
           (is_inf(makespan) ? std::string("inf") : fmt("%.6g", makespan) + " s") +
           "</text>\n";

    // time axis ticks at quarters
    for (int k = 0; k <= 4; ++k) {
        double t = span * k / 4.0;
        svg += "<line x1=\"" + fmt("%.6g", xpos(t)) + "\" y1=\"" +
               fmt("%.6g", top - 6.0) + "\" x2=\"" + fmt("%.6g", xpos(t)) +
               "\" y2=\"" + fmt("%.6g", height - 24.0) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + fmt("%.6g", xpos(t) + 2.0) + "\" y=\"" +
               fmt("%.6g", height - 10.0) + "\" fill=\"#666666\">" +
               fmt("%.4g", t) + "</text>\n";
    }

    for (size_t r = 0; r < units.size(); ++r) {
        double y = top + row_h * static_cast<double>(r);
        svg += "<text x=\"8\" y=\"" + fmt("%.6g", y + bar_h - 5.0) + "\">" +
               xml_escape(units[r]) + "</text>\n";
        svg += "<line x1=\"" + fmt("%.6g", label_w) + "\" y1=\"" +
               fmt("%.6g", y + row_h - 4.0) + "\" x2=\"" +
               fmt("%.6g", label_w + plot_w) + "\" y2=\"" +
               fmt("%.6g", y + row_h - 4.0) + "\" stroke=\"#eeeeee\"/>\n";
    }

    for (const Event& e : tl.events) {
        auto it = std::lower_bound(units.begin(), units.end(), e.unit);
        double y = top + row_h * static_cast<double>(it - units.begin());
        double x0 = xpos(e.start), x1 = xpos(e.end);
        double w = std::max(x1 - x0, 0.75);
        svg += "<rect x=\"" + fmt("%.6g", x0) + "\" y=\"" + fmt("%.6g", y) +
               "\" width=\"" + fmt("%.6g", w) + "\" height=\"" +
               fmt("%.6g", bar_h) + "\" fill=\"" + event_color(e.kind) +
               "\" fill-opacity=\"0.85\"><title>node " +
               std::to_string(e.node) + " " + event_kind_name(e.kind) + " [" +
               fmt("%.6g", e.start) + ", " + fmt("%.6g", e.end) +
               "]</title></rect>\n";
        if (w > 14.0) {
            svg += "<text x=\"" + fmt("%.6g", x0 + 2.0) + "\" y=\"" +
                   fmt("%.6g", y + bar_h - 6.0) + "\" fill=\"white\">" +
                   std::to_string(e.node) + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace hetmap
