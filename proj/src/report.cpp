#include "grassmin/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace grassmin::cli {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string opt_field(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

std::string format_convergence_csv(const ConvergenceRecord& rec) {
    std::string out =
        "iter,energy,res_l2,res_dual,subspace_err_l2,subspace_err_bhat,rate_est,step\n";
    for (const auto& r : rec.rows) {
        out += std::to_string(r.iter);
        out += ',';
        out += format_double(r.energy);
        out += ',';
        out += format_double(r.res_l2);
        out += ',';
        out += format_double(r.res_dual);
        out += ',';
        out += opt_field(r.err_l2);
        out += ',';
        out += opt_field(r.err_bhat);
        out += ',';
        out += opt_field(r.rate_est);
        out += ',';
        out += opt_field(r.step);
        out += '\n';
    }
    return out;
}

ConvergenceRecord parse_convergence_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV: " + path.string());
    std::string header;
    std::getline(in, header);
    if (header !=
        "iter,energy,res_l2,res_dual,subspace_err_l2,subspace_err_bhat,rate_est,step")
        throw IoError("unexpected CSV header in " + path.string());
    ConvergenceRecord rec;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        fields.resize(8);
        RecordRow r;
        r.iter = std::stoi(fields[0]);
        r.energy = std::stod(fields[1]);
        r.res_l2 = std::stod(fields[2]);
        r.res_dual = std::stod(fields[3]);
        auto opt = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return std::stod(s);
        };
        r.err_l2 = opt(fields[4]);
        r.err_bhat = opt(fields[5]);
        r.rate_est = opt(fields[6]);
        r.step = opt(fields[7]);
        rec.rows.push_back(r);
    }
    return rec;
}

std::string format_verdicts_csv(const std::vector<Verdict>& verdicts) {
    std::string out = "check,status,measured,threshold,seed,details\n";
    for (const auto& v : verdicts) {
        out += v.check;
        out += ',';
        out += v.status;
        out += ',';
        out += format_double(v.measured);
        out += ',';
        out += format_double(v.threshold);
        out += ',';
        out += std::to_string(v.seed);
        out += ',';
        out += v.details;
        out += '\n';
    }
    return out;
}

namespace {

struct Series {
    const char* label;
    const char* color;
    std::vector<std::pair<double, double>> points;  // iter, log10(value)
};

}  // namespace

std::string render_svg(const ConvergenceRecord& rec) {
    constexpr double width = 720, height = 480, ml = 60, mr = 160, mt = 24, mb = 42;
    std::vector<Series> series = {{"res_dual", "#1f77b4", {}},
                                  {"res_l2", "#ff7f0e", {}},
                                  {"subspace_err_l2", "#2ca02c", {}},
                                  {"subspace_err_bhat", "#d62728", {}}};
    auto push = [](Series& s, int it, double v) {
        if (v > 0 && std::isfinite(v)) s.points.emplace_back(it, std::log10(v));
    };
    for (const auto& r : rec.rows) {
        push(series[0], r.iter, r.res_dual);
        push(series[1], r.iter, r.res_l2);
        if (r.err_l2) push(series[2], r.iter, *r.err_l2);
        if (r.err_bhat) push(series[3], r.iter, *r.err_bhat);
    }
    double xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (!any) {
                ymin = ymax = y;
                any = true;
            }
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!any) ymin = -1;
    if (ymax - ymin < 1e-9) ymax = ymin + 1;

    auto px = [&](double x) { return ml + (width - ml - mr) * (x / xmax); };
    auto py = [&](double y) { return mt + (height - mt - mb) * (ymax - y) / (ymax - ymin); };
    char buf[256];
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
           "viewBox=\"0 0 720 480\">\n";
    svg += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  ml, height - mb, width - mr, height - mb);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                  ml, mt, ml, height - mb);
    svg += buf;
    // y ticks at integer log10 levels
    for (int lvl = static_cast<int>(std::floor(ymin)); lvl <= static_cast<int>(std::ceil(ymax));
         ++lvl) {
        if (lvl < ymin - 0.5 || lvl > ymax + 0.5) continue;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\" "
                      "fill=\"#444\">1e%d</text>\n",
                      ml - 6, py(lvl) + 4, lvl);
        svg += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" fill=\"#111\">iteration</text>\n",
                  (ml + width - mr) / 2 - 24.0, height - 10);
    svg += buf;
    int legend_row = 0;
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += s.color;
        svg += "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : s.points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
            svg += buf;
        }
        svg += "\"/>\n";
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                      width - mr + 12, mt + 16.0 + 18.0 * legend_row, s.color, s.label);
        svg += buf;
        ++legend_row;
    }
    svg += "</svg>\n";
    return svg;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out.good()) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename into place: " + path.string());
    }
}

}  // namespace grassmin::cli
