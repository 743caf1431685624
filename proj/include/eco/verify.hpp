#pragma once

#include <string>
#include <vector>

namespace eco {

struct VerifyIssue {
    std::string check;
    std::string where;
    std::string detail;
};

struct VerifyReport {
    int checks_run = 0;
    std::vector<VerifyIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Replays invariant checks against a completed run directory:
//   - energy closure of every stored trace (start + eta*harvest - drain,
//     capacity clipping included) against the logged levels;
//   - violation counts and cell aggregates recomputed from raw traces;
//   - rollout dominance: ECO day utility >= stored base-plan replay utility;
//   - iterative reference dominance per day (1e-3 relative tolerance);
//   - closed-form correction == from-scratch re-derivation on the logged
//     deviation history;
//   - a fresh canonical solve: dual non-negativity and KKT residuals < 1e-4;
//   - determinism: one stored cell day re-simulated from the manifest seed
//     must reproduce its trace rows byte-for-byte.
VerifyReport verify_run(const std::string& out_dir);

} // namespace eco
