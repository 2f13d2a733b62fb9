#include "ttql/harness.hpp"

#include "ttql/mdp_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ttql {

namespace {

constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed(double value, int digits = 2) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
    return buffer;
}

std::string escape_xml(std::string_view text) {
    std::string out;
    for (char c : text) {
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

std::string tick_label(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%g", value);
    return buffer;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

double parse_cell(std::string_view cell, const std::filesystem::path& path, std::size_t line) {
    if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (cell == "inf") return std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto result = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || result.ec != std::errc() || result.ptr != cell.data() + cell.size())
        throw std::invalid_argument(path.string() + ":" + std::to_string(line) +
                                    ": not a number: '" + std::string(cell) + "'");
    return value;
}

} // namespace

ChartSeries read_chart_series(const std::filesystem::path& csv_path, std::string_view y_column,
                              std::string label) {
    const std::string text = read_text_file(csv_path);
    ChartSeries series;
    series.label = std::move(label);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::size_t x_index = 0;
    std::size_t y_index = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (line_no == 1) {
            const auto find = [&](std::string_view name) {
                const auto it = std::find(cells.begin(), cells.end(), name);
                if (it == cells.end())
                    throw std::invalid_argument(csv_path.string() + ": no column '" +
                                                std::string(name) + "'");
                return static_cast<std::size_t>(it - cells.begin());
            };
            x_index = find("step");
            y_index = find(y_column);
            continue;
        }
        if (cells.size() <= std::max(x_index, y_index))
            throw std::invalid_argument(csv_path.string() + ":" + std::to_string(line_no) +
                                        ": too few columns");
        series.x.push_back(parse_cell(cells[x_index], csv_path, line_no));
        series.y.push_back(parse_cell(cells[y_index], csv_path, line_no));
    }
    if (line_no == 0) throw std::invalid_argument(csv_path.string() + ": empty file");
    return series;
}

std::string svg_line_chart(const std::vector<ChartSeries>& series, const ChartOptions& options) {
    const double width = 800;
    const double height = 500;
    const double left = 70;
    const double right = 190;
    const double top = 40;
    const double bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!options.log_y || y > 0.0);
    };
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = x_min;
    double y_max = -x_min;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            const double y = options.log_y ? std::log10(s.y[i]) : s.y[i];
            x_min = std::min(x_min, s.x[i]);
            x_max = std::max(x_max, s.x[i]);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0;
        x_max = 1;
        y_min = 0;
        y_max = 1;
    }
    if (options.log_y) {
        y_min = std::floor(y_min);
        y_max = std::ceil(y_max);
    }
    if (x_max <= x_min) x_max = x_min + 1;
    if (y_max <= y_min) y_max = y_min + 1;

    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return top + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
           fixed(height, 0) + "\" viewBox=\"0 0 " + fixed(width, 0) + " " + fixed(height, 0) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + fixed(left) + "\" y=\"24\" font-size=\"14\">" + escape_xml(options.title) +
           "</text>\n";
    out += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(plot_w) +
           "\" height=\"" + fixed(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";

    // Horizontal grid: decades on a log axis, five bands otherwise.
    const int y_ticks = options.log_y ? static_cast<int>(y_max - y_min) : 5;
    for (int k = 0; k <= y_ticks; ++k) {
        const double y = y_min + (y_max - y_min) * k / y_ticks;
        const double yy = py(y);
        out += "<line x1=\"" + fixed(left) + "\" y1=\"" + fixed(yy) + "\" x2=\"" +
               fixed(left + plot_w) + "\" y2=\"" + fixed(yy) + "\" stroke=\"#dddddd\"/>\n";
        out += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(yy + 4) +
               "\" text-anchor=\"end\">" + tick_label(options.log_y ? std::pow(10.0, y) : y) +
               "</text>\n";
    }
    for (int k = 0; k <= 5; ++k) {
        const double x = x_min + (x_max - x_min) * k / 5;
        out += "<text x=\"" + fixed(px(x)) + "\" y=\"" + fixed(top + plot_h + 18) +
               "\" text-anchor=\"middle\">" + tick_label(std::round(x)) + "</text>\n";
    }
    out += "<text x=\"" + fixed(left + plot_w / 2) + "\" y=\"" + fixed(height - 10) +
           "\" text-anchor=\"middle\">" + escape_xml(options.x_label) + "</text>\n";
    out += "<text transform=\"translate(16," + fixed(top + plot_h / 2) +
           ") rotate(-90)\" text-anchor=\"middle\">" + escape_xml(options.y_label) +
           (options.log_y ? " (log scale)" : "") + "</text>\n";

    const std::size_t max_points = std::max<std::size_t>(2, options.max_points);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 1) / max_points);
        const char* colour = palette[k % std::size(palette)];
        std::string points;
        for (std::size_t i = 0; i < n; ++i) {
            if (i % stride != 0 && i + 1 != n) continue;
            if (!usable(s.x[i], s.y[i])) continue;
            const double y = options.log_y ? std::log10(s.y[i]) : s.y[i];
            if (!points.empty()) points += ' ';
            points += fixed(px(s.x[i])) + "," + fixed(py(y));
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(k);
        out += "<line x1=\"" + fixed(width - right + 12) + "\" y1=\"" + fixed(ly) + "\" x2=\"" +
               fixed(width - right + 36) + "\" y2=\"" + fixed(ly) + "\" stroke=\"" + colour +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + fixed(width - right + 42) + "\" y=\"" + fixed(ly + 4) + "\">" +
               escape_xml(s.label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace ttql
