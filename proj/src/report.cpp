#include "aoi/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aoi/errors.hpp"

namespace aoi::report {

double mismatch_fraction(double theoretical, double empirical) {
    return std::abs(theoretical - empirical) / empirical;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::string to_csv(const std::vector<Row>& rows, const std::vector<std::string>& notes) {
    std::ostringstream out;
    for (const std::string& note : notes) out << "# " << note << '\n';
    out << "experiment,C,N,w,z,policy,param1,param2,theoretical,empirical,mismatch,"
           "f_value,seed,runs,slots,rng_id\n";
    for (const Row& r : rows) {
        out << r.experiment << ',' << r.c << ',' << r.n << ',' << format_double(r.w) << ',' << r.z
            << ',' << r.policy << ',' << format_double(r.param1) << ',' << format_double(r.param2)
            << ',' << format_double(r.theoretical) << ',' << format_double(r.empirical) << ','
            << format_double(r.mismatch) << ',' << format_double(r.f_value) << ',' << r.seed << ','
            << r.runs << ',' << r.slots << ',' << r.rng_id << '\n';
    }
    return out.str();
}

void write_csv(const std::filesystem::path& file, const std::vector<Row>& rows,
               const std::vector<std::string>& notes) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << to_csv(rows, notes);
}

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 150;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Range {
    double lo;
    double hi;
    double span() const { return hi > lo ? hi - lo : 1.0; }
};

Range find_range(const std::vector<double>& values) {
    Range r{0.0, 1.0};
    bool first = true;
    for (double v : values) {
        if (std::isnan(v)) continue;
        if (first) {
            r = Range{v, v};
            first = false;
        } else {
            r.lo = std::min(r.lo, v);
            r.hi = std::max(r.hi, v);
        }
    }
    if (r.lo > 0.0 && r.lo < 0.25 * r.hi) r.lo = 0.0; // anchor near-zero axes at zero
    return r;
}

void open_svg(std::ostream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
}

double map_x(double x, const Range& r) {
    return kMarginLeft + (x - r.lo) / r.span() * (kWidth - kMarginLeft - kMarginRight);
}

double map_y(double y, const Range& r) {
    return kHeight - kMarginBottom - (y - r.lo) / r.span() * (kHeight - kMarginTop - kMarginBottom);
}

void draw_axes(std::ostream& out, const Range& xr, const Range& yr, const std::string& x_label,
               const std::string& y_label) {
    const int x0 = kMarginLeft;
    const int y0 = kHeight - kMarginBottom;
    const int x1 = kWidth - kMarginRight;
    const int y1 = kMarginTop;
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xr.lo + xr.span() * i / 4.0;
        const double fy = yr.lo + yr.span() * i / 4.0;
        out << "<text x=\"" << format_double(map_x(fx, xr)) << "\" y=\"" << y0 + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << format_double(fx) << "</text>\n";
        out << "<text x=\"" << x0 - 6 << "\" y=\"" << format_double(map_y(fy, yr) + 3)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << format_double(fy) << "</text>\n";
    }
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << (y0 + y1) / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << (y0 + y1) / 2 << ")\">" << y_label << "</text>\n";
}

} // namespace

void write_line_chart(const std::filesystem::path& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());

    std::vector<double> xs;
    std::vector<double> ys;
    for (const Series& s : series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        ys.insert(ys.end(), s.y.begin(), s.y.end());
    }
    const Range xr = find_range(xs);
    const Range yr = find_range(ys);

    open_svg(out, title);
    draw_axes(out, xr, yr, x_label, y_label);
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series[si].x.size(); ++i) {
            if (std::isnan(series[si].y[i])) continue;
            out << format_double(map_x(series[si].x[i], xr)) << ','
                << format_double(map_y(series[si].y[i], yr)) << ' ';
        }
        out << "\"/>\n";
        for (std::size_t i = 0; i < series[si].x.size(); ++i) {
            if (std::isnan(series[si].y[i])) continue;
            out << "<circle cx=\"" << format_double(map_x(series[si].x[i], xr)) << "\" cy=\""
                << format_double(map_y(series[si].y[i], yr)) << "\" r=\"2.5\" fill=\"" << color
                << "\"/>\n";
        }
        const int ly = kMarginTop + 16 * static_cast<int>(si);
        out << "<rect x=\"" << kWidth - kMarginRight + 12 << "\" y=\"" << ly
            << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n"
            << "<text x=\"" << kWidth - kMarginRight + 26 << "\" y=\"" << ly + 9
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[si].label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_bar_chart(const std::filesystem::path& file, const std::string& title,
                     const std::vector<std::string>& bar_labels,
                     const std::vector<BarGroup>& groups) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());

    std::vector<double> all;
    for (const BarGroup& g : groups) all.insert(all.end(), g.values.begin(), g.values.end());
    Range yr = find_range(all);
    yr.lo = std::min(yr.lo, 0.0);

    open_svg(out, title);
    draw_axes(out, Range{0.0, 1.0}, yr, "", "");
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double group_w = plot_w / std::max<std::size_t>(1, groups.size());
    const double bar_w = group_w * 0.8 / std::max<std::size_t>(1, bar_labels.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const double gx = kMarginLeft + group_w * static_cast<double>(gi) + group_w * 0.1;
        for (std::size_t bi = 0; bi < groups[gi].values.size(); ++bi) {
            const double v = groups[gi].values[bi];
            if (std::isnan(v)) continue;
            const double y = map_y(v, yr);
            const double y0 = map_y(std::max(0.0, yr.lo), yr);
            const char* color = kPalette[bi % (sizeof(kPalette) / sizeof(kPalette[0]))];
            out << "<rect x=\"" << format_double(gx + bar_w * static_cast<double>(bi)) << "\" y=\""
                << format_double(std::min(y, y0)) << "\" width=\"" << format_double(bar_w * 0.9)
                << "\" height=\"" << format_double(std::abs(y0 - y)) << "\" fill=\"" << color
                << "\"/>\n";
        }
        out << "<text x=\"" << format_double(gx + group_w * 0.4) << "\" y=\""
            << kHeight - kMarginBottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << groups[gi].label << "</text>\n";
    }
    for (std::size_t bi = 0; bi < bar_labels.size(); ++bi) {
        const char* color = kPalette[bi % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const int ly = kMarginTop + 16 * static_cast<int>(bi);
        out << "<rect x=\"" << kWidth - kMarginRight + 12 << "\" y=\"" << ly
            << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n"
            << "<text x=\"" << kWidth - kMarginRight + 26 << "\" y=\"" << ly + 9
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << bar_labels[bi] << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace aoi::report
