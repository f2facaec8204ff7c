#pragma once

#include "grassmin/config.hpp"
#include "grassmin/report.hpp"

namespace grassmin::cli {

/// build -> solve -> (oracle diagnostics) -> bundle. Exit code 0 converged,
/// 2 no-convergence, 3 diverged.
ReportBundle run(const RunConfig& cfg);

/// run() plus the full theory-verdict suite (Bhat symmetry/positivity,
/// ellipticity probe, gap). Exit 0 only when converged and every verdict
/// passes.
ReportBundle run_verify(const RunConfig& cfg);

/// Runs alg1/alg2/alg3 on the one fixture from the same start and reports
/// pairwise final subspace distances and trailing contraction rates.
ReportBundle run_compare(const RunConfig& cfg);

}  // namespace grassmin::cli
