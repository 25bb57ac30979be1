#pragma once

#include <string>
#include <vector>

namespace torsionstab {

/// Stability verdict for the zero solution, with where it came from.
struct StabilityVerdict {
    enum class Verdict { AsymptoticallyStable, Stable, Unstable, Inconclusive };
    enum class Provenance { TorsionTheorem, CurvatureTheorem, EigenvalueOracle };

    Verdict verdict = Verdict::Inconclusive;
    Provenance provenance = Provenance::EigenvalueOracle;
    std::vector<std::string> notes;
};

inline const char* to_string(StabilityVerdict::Verdict v) {
    switch (v) {
        case StabilityVerdict::Verdict::AsymptoticallyStable: return "asymptotically-stable";
        case StabilityVerdict::Verdict::Stable: return "stable";
        case StabilityVerdict::Verdict::Unstable: return "unstable";
        default: return "inconclusive";
    }
}

inline const char* to_string(StabilityVerdict::Provenance p) {
    switch (p) {
        case StabilityVerdict::Provenance::TorsionTheorem: return "torsion-theorem";
        case StabilityVerdict::Provenance::CurvatureTheorem: return "curvature-theorem";
        default: return "eigenvalue-oracle";
    }
}

}  // namespace torsionstab
