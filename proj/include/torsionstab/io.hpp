#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "torsionstab/asymptotics.hpp"
#include "torsionstab/discriminance.hpp"
#include "torsionstab/geometry.hpp"
#include "torsionstab/matrix.hpp"

namespace torsionstab {

/// On-disk matrix description: {"n": int, "rows": [[...], ...], "label": optional}.
struct MatrixDocument {
    int n = 0;
    std::vector<std::vector<double>> rows;
    std::optional<std::string> label;

    RealMatrix matrix() const {
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return RealMatrix(std::move(m));
    }

    static MatrixDocument from_matrix(const RealMatrix& a, std::optional<std::string> label) {
        MatrixDocument doc;
        doc.n = a.n();
        doc.label = std::move(label);
        doc.rows.assign(static_cast<std::size_t>(a.n()),
                        std::vector<double>(static_cast<std::size_t>(a.n())));
        for (int i = 0; i < a.n(); ++i)
            for (int j = 0; j < a.n(); ++j)
                doc.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = a(i, j);
        return doc;
    }
};

namespace detail {

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

inline MatrixDocument parse_matrix_document(const std::string& text,
                                            const std::string& origin = "<input>") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = detail::line_column(text, e.byte);
        throw PreconditionError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                ": " + e.what());
    }
    MatrixDocument doc;
    if (!j.is_object() || !j.contains("n") || !j.contains("rows"))
        throw PreconditionError(origin + ": matrix document must be an object with n and rows");
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 1)
        throw PreconditionError(origin + ": n must be a positive integer");
    doc.n = j["n"].get<int>();
    if (!j["rows"].is_array() || static_cast<int>(j["rows"].size()) != doc.n)
        throw PreconditionError(origin + ": rows must be an array of n rows");
    for (const auto& row : j["rows"]) {
        if (!row.is_array() || static_cast<int>(row.size()) != doc.n)
            throw PreconditionError(origin + ": every row must hold exactly n numbers");
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) throw PreconditionError(origin + ": matrix entries must be numbers");
            double x = v.get<double>();
            if (!std::isfinite(x)) throw PreconditionError(origin + ": matrix entries must be finite");
            r.push_back(x);
        }
        doc.rows.push_back(std::move(r));
    }
    if (j.contains("label")) {
        if (!j["label"].is_string()) throw PreconditionError(origin + ": label must be a string");
        doc.label = j["label"].get<std::string>();
    }
    return doc;
}

inline MatrixDocument read_matrix_document(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_matrix_document(ss.str(), path);
}

inline nlohmann::json matrix_document_json(const MatrixDocument& doc) {
    nlohmann::json j;
    j["n"] = doc.n;
    j["rows"] = doc.rows;
    if (doc.label) j["label"] = *doc.label;
    return j;
}

inline void write_matrix_document(const MatrixDocument& doc, std::ostream& out) {
    out << matrix_document_json(doc).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Numeric formatting. Machine-readable output carries 17 significant digits.
// ---------------------------------------------------------------------------

inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_human(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// Linear-domain value from a natural log, kept printable even when exp()
/// would leave the double range.
inline std::string format_linear_from_log(double log_value) {
    double v = std::exp(log_value);
    if (std::isfinite(v)) return format_full(v);
    double log10v = log_value / 2.302585092994046;
    double e = std::floor(log10v);
    double mant = std::pow(10.0, log10v - e);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12fe%+d", mant, static_cast<int>(e));
    return buf;
}

// ---------------------------------------------------------------------------
// Trace CSV: t, logV1..logV{k_max}, kappa_1..kappa_{k_max-1}, tau.
// Empty cell = undefined at that point; volumes print -inf when degenerate;
// kappa and tau are linear-domain.
// ---------------------------------------------------------------------------

inline std::string trace_csv_header(int k_max) {
    std::string h = "t";
    for (int k = 1; k <= k_max; ++k) h += ",logV" + std::to_string(k);
    for (int i = 1; i <= k_max - 1; ++i) h += ",kappa_" + std::to_string(i);
    h += ",tau";
    return h;
}

inline void write_trace_csv(const ProfileTrace& profile, std::ostream& out) {
    const int k_max = profile.order;
    out << trace_csv_header(k_max) << "\n";
    for (std::size_t row = 0; row < profile.samples.size(); ++row) {
        const CurvatureSample& s = profile.samples[row];
        out << format_full(profile.times[row]);
        for (int k = 1; k <= k_max; ++k) {
            const LogVolume& v = s.log_v[static_cast<std::size_t>(k)];
            out << ',' << (v.is_zero ? std::string("-inf") : format_full(v.log_value));
        }
        for (int i = 1; i <= k_max - 1; ++i) {
            const LogQuantity& q = s.log_kappa[static_cast<std::size_t>(i - 1)];
            out << ',';
            if (q.is_defined())
                out << format_linear_from_log(q.log_value);
            else if (q.is_zero())
                out << "0";
        }
        LogQuantity tau = torsion(s, profile.structural_v2_zero);
        out << ',';
        if (tau.is_defined())
            out << format_linear_from_log(tau.log_value);
        else if (tau.is_zero())
            out << "0";
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Analysis report rendering (text + JSON mirror).
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json labels_json(const std::vector<LimitClass>& labels) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& l : labels) {
        nlohmann::json e;
        e["label"] = to_string(l.label);
        e["slope"] = l.slope;
        e["oscillation"] = l.oscillation;
        e["tail_mean"] = l.tail_mean;
        if (!l.note.empty()) e["note"] = l.note;
        arr.push_back(std::move(e));
    }
    return arr;
}

inline std::string histogram_line(const std::vector<LimitClass>& labels) {
    int counts[5] = {0, 0, 0, 0, 0};
    for (const auto& l : labels) counts[static_cast<int>(l.label)]++;
    std::ostringstream os;
    os << "zero=" << counts[0] << " inf=" << counts[1] << " const=" << counts[2]
       << " no-limit=" << counts[3] << " inconclusive=" << counts[4];
    return os.str();
}

}  // namespace detail

inline nlohmann::json report_json(const ReconciliationReport& r,
                                  const std::optional<std::string>& label) {
    nlohmann::json j;
    if (label) j["label"] = *label;
    j["n"] = r.summary.n;
    nlohmann::json eigs = nlohmann::json::array();
    for (const auto& z : r.summary.eigs) eigs.push_back({{"re", z.real()}, {"im", z.imag()}});
    j["spectrum"] = {{"eigenvalues", std::move(eigs)},
                     {"abscissa", r.summary.M},
                     {"det", r.summary.det},
                     {"invertible", r.summary.invertible},
                     {"semisimple_critical", r.summary.semisimple_critical}};
    if (r.summary.N) j["spectrum"]["second_abscissa"] = *r.summary.N;
    if (r.summary.lambda_order) j["spectrum"]["lambda_order"] = *r.summary.lambda_order;
    if (!r.summary.notes.empty()) j["spectrum"]["notes"] = r.summary.notes;

    if (r.jordan) {
        nlohmann::json real_blocks = nlohmann::json::array();
        for (const auto& g : r.jordan->real_blocks)
            real_blocks.push_back({{"lambda", g.lambda}, {"sizes", g.sizes}});
        nlohmann::json complex_blocks = nlohmann::json::array();
        for (const auto& g : r.jordan->complex_blocks)
            complex_blocks.push_back({{"a", g.a}, {"b", g.b}, {"sizes", g.sizes}});
        j["jordan"] = {{"real_blocks", std::move(real_blocks)},
                       {"complex_blocks", std::move(complex_blocks)},
                       {"canonical_form_input", r.jordan->layout.has_value()}};
    } else {
        j["jordan"] = {{"error", r.jordan_error}};
    }
    j["diagonalizable_real"] = r.diagonalizable_real;

    nlohmann::json qs = nlohmann::json::array();
    for (const auto& q : r.quantities) {
        nlohmann::json e;
        e["quantity"] = q.quantity.name();
        e["labels"] = detail::labels_json(q.labels);
        e["verdict"] = to_string(q.verdict.verdict);
        e["provenance"] = to_string(q.verdict.provenance);
        if (!q.verdict.notes.empty()) e["notes"] = q.verdict.notes;
        if (q.prediction) {
            e["prediction"] = {{"class", to_string(q.prediction->cls)},
                               {"applicable", q.prediction->applicable},
                               {"reason", q.prediction->reason}};
            if (q.prediction->value) e["prediction"]["value"] = *q.prediction->value;
            e["prediction_agree"] = q.prediction_agree;
            e["prediction_comparable"] = q.prediction_comparable;
        }
        qs.push_back(std::move(e));
    }
    j["quantities"] = std::move(qs);
    j["geometric"] = {{"verdict", to_string(r.geometric.verdict)},
                      {"provenance", to_string(r.geometric.provenance)},
                      {"notes", r.geometric.notes}};
    j["oracle"] = {{"verdict", to_string(r.oracle.verdict)},
                   {"notes", r.oracle.notes}};
    j["consistent"] = r.consistent;
    j["samples"] = r.samples;
    j["seed"] = r.seed;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

inline std::string report_text(const ReconciliationReport& r,
                               const std::optional<std::string>& label) {
    std::ostringstream os;
    os << "torsionstab analysis";
    if (label) os << ": " << *label;
    os << "\n" << std::string(60, '-') << "\n";
    os << "n = " << r.summary.n << ", samples = " << r.samples << ", seed = " << r.seed << "\n";
    os << "eigenvalues:";
    for (const auto& z : r.summary.eigs) {
        os << " " << format_human(z.real());
        if (z.imag() != 0.0) os << (z.imag() > 0 ? "+" : "-") << format_human(std::abs(z.imag())) << "i";
    }
    os << "\n";
    os << "spectral abscissa M = " << format_human(r.summary.M)
       << ", det = " << format_human(r.summary.det)
       << ", invertible = " << (r.summary.invertible ? "yes" : "no")
       << ", critical semisimple = " << (r.summary.semisimple_critical ? "yes" : "no") << "\n";
    if (r.summary.lambda_order) {
        os << "distinct nonzero eigenvalues (desc):";
        for (double v : *r.summary.lambda_order) os << " " << format_human(v);
        os << "\n";
    }
    for (const auto& note : r.summary.notes) os << "note: " << note << "\n";

    if (r.jordan) {
        os << "jordan structure:";
        for (const auto& g : r.jordan->real_blocks) {
            os << " J(" << format_human(g.lambda) << "){";
            for (std::size_t i = 0; i < g.sizes.size(); ++i)
                os << (i ? "," : "") << g.sizes[i];
            os << "}";
        }
        for (const auto& g : r.jordan->complex_blocks) {
            os << " C(" << format_human(g.a) << "," << format_human(g.b) << "){";
            for (std::size_t i = 0; i < g.sizes.size(); ++i)
                os << (i ? "," : "") << g.sizes[i];
            os << "}";
        }
        os << "\n";
    } else {
        os << "jordan structure: unavailable (" << r.jordan_error << ")\n";
    }

    for (const auto& q : r.quantities) {
        os << q.quantity.name() << ": " << detail::histogram_line(q.labels)
           << " -> " << to_string(q.verdict.verdict) << " [" << to_string(q.verdict.provenance)
           << "]\n";
        for (const auto& note : q.verdict.notes) os << "    note: " << note << "\n";
        if (q.prediction && q.prediction->applicable) {
            os << "    prediction: " << to_string(q.prediction->cls);
            if (q.prediction->value) os << " (value " << format_human(*q.prediction->value) << ")";
            os << "; numeric agreement " << q.prediction_agree << "/" << q.prediction_comparable
               << "\n";
        }
    }

    os << "geometric verdict: " << to_string(r.geometric.verdict) << " ["
       << to_string(r.geometric.provenance) << "]\n";
    for (const auto& note : r.geometric.notes) os << "    note: " << note << "\n";
    os << "oracle verdict:    " << to_string(r.oracle.verdict) << "\n";
    for (const auto& note : r.oracle.notes) os << "    note: " << note << "\n";
    os << "consistent: " << (r.consistent ? "yes" : "no") << "\n";
    return os.str();
}

}  // namespace torsionstab
