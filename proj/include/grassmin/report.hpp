#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grassmin/solvers.hpp"

namespace grassmin::cli {

struct ReportBundle {
    std::filesystem::path convergence_csv;
    std::filesystem::path verdicts_csv;
    std::filesystem::path report_txt;
    std::optional<std::filesystem::path> svg;
    std::vector<std::filesystem::path> extra_csv;  // compare mode: per-algorithm
    int exit_code = 0;
};

/// One executable check of the convergence theory on this run.
struct Verdict {
    std::string check;
    std::string status;  ///< pass | fail | skip
    double measured = 0.0;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    std::string details;
};

/// Convergence CSV: header
/// iter,energy,res_l2,res_dual,subspace_err_l2,subspace_err_bhat,rate_est,step
/// with 17-significant-digit numbers and empty fields for absent quantities.
std::string format_convergence_csv(const ConvergenceRecord& rec);

/// Parses a convergence CSV back into a record (round-trip exact at
/// 17 significant digits). Status is not stored in the CSV.
ConvergenceRecord parse_convergence_csv(const std::filesystem::path& path);

std::string format_verdicts_csv(const std::vector<Verdict>& verdicts);

/// Single log10-scale polyline chart, one series per recorded error column.
std::string render_svg(const ConvergenceRecord& rec);

/// Atomic write: temp file + rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string format_double(double v);  ///< %.17g

}  // namespace grassmin::cli
