#include "loopsoup/plot.hpp"

#include "loopsoup/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace loopsoup {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace

std::string render_svg(const std::vector<Curve>& curves, const PlotOptions& opt) {
    if (!(opt.width > 0.0) || opt.hull_cells < 2) fail(ErrorCode::InvalidArgument, "bad plot size");
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const auto& c : curves)
        for (const auto& p : c.points()) {
            if (first) {
                xmin = xmax = p.real();
                ymin = ymax = p.imag();
                first = false;
            }
            xmin = std::min(xmin, p.real());
            xmax = std::max(xmax, p.real());
            ymin = std::min(ymin, p.imag());
            ymax = std::max(ymax, p.imag());
        }
    double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double pad = 0.05 * span;
    xmin -= pad;
    xmax += pad;
    ymin -= pad;
    ymax += pad;
    const double s = opt.width / (xmax - xmin);
    const double height = std::max(1.0, (ymax - ymin) * s);
    auto X = [&](double x) { return num((x - xmin) * s); };
    auto Y = [&](double y) { return num((ymax - y) * s); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(opt.width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(opt.width) << ' ' << num(height) << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (ymin < 0.0 && ymax > 0.0)
        o << "<line x1=\"0\" y1=\"" << Y(0.0) << "\" x2=\"" << num(opt.width) << "\" y2=\"" << Y(0.0)
          << "\" stroke=\"#888\" stroke-width=\"0.5\"/>\n";
    const double cell = span / opt.hull_cells;
    for (std::size_t k = 0; k < curves.size(); ++k) {
        const Curve& c = curves[k];
        const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
        if (opt.hull && c.closed() && c.size() > 2) {
            try {
                Hull h = fill_hull(Loop(c), cell);
                o << "<g fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\">";
                for (int j = 0; j < h.ny; ++j)
                    for (int i = 0; i < h.nx;) {
                        if (!h.at(i, j)) {
                            ++i;
                            continue;
                        }
                        int i1 = i;
                        while (i1 < h.nx && h.at(i1, j)) ++i1;
                        o << "<rect x=\"" << X(h.x0 + i * h.h) << "\" y=\"" << Y(h.y0 + (j + 1) * h.h) << "\" width=\""
                          << num((i1 - i) * h.h * s) << "\" height=\"" << num(h.h * s) << "\"/>";
                        i = i1;
                    }
                o << "</g>\n";
            } catch (const Error&) {
                // loop smaller than one hull cell: outline only
            }
        }
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(opt.stroke)
          << "\" stroke-linejoin=\"round\" points=\"";
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) o << ' ';
            o << X(c.points()[i].real()) << ',' << Y(c.points()[i].imag());
        }
        o << "\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace loopsoup
