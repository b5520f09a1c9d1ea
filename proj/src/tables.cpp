#include "dwsafe/tables.hpp"

#include <cmath>
#include <sstream>

#include "dwsafe/safety.hpp"

namespace dwsafe {

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

WorldParams params_for(double A, double b, double V, double eps) {
    WorldParams p;
    p.A = A;
    p.b = b;
    p.V = V;
    p.eps = eps;
    return p;
}

TableRow finish(TableRow row) {
    row.consistent = std::abs(round2(row.computed) - row.reference) <= 0.01 + 1e-12;
    return row;
}

}  // namespace

TableRow make_distance_row(SafetyMode mode, double v, double A, double b, double V, double eps) {
    TableRow row;
    row.v = v;
    row.A = A;
    row.b = b;
    row.V = V;
    row.eps = eps;
    const WorldParams p = params_for(A, b, V, eps);
    SafetyQuery q;
    q.mode = mode;
    q.v_r = v;
    q.v_hat = v;
    q.params = &p;
    row.computed = safe_distance(q);
    return row;
}

TableRow make_velocity_row(SafetyMode mode, double dist, double A, double b, double V,
                           double eps) {
    TableRow row;
    row.dist = dist;
    row.A = A;
    row.b = b;
    row.V = V;
    row.eps = eps;
    const WorldParams p = params_for(A, b, V, eps);
    row.computed = max_velocity(mode, dist, p);
    return row;
}

namespace {

TableRow dist_row(SafetyMode mode, double v, double A, double b, double V, double eps, double ref,
                  const char* label = "") {
    TableRow row = make_distance_row(mode, v, A, b, V, eps);
    row.reference = ref;
    row.label = label;
    return finish(row);
}

TableRow vel_row(SafetyMode mode, double dist, double A, double b, double V, double eps,
                 double ref, const char* label) {
    TableRow row = make_velocity_row(mode, dist, A, b, V, eps);
    row.reference = ref;
    row.label = label;
    return finish(row);
}

}  // namespace

std::vector<TableRow> static_min_distance_table() {
    const SafetyMode m = SafetyMode::kStatic;
    return {
        dist_row(m, 1.0, 1.0, 1.0, 0.0, 0.05, 0.61),
        dist_row(m, 0.5, 0.5, 0.5, 0.0, 0.025, 0.28),
        dist_row(m, 2.0, 2.0, 2.0, 0.0, 0.1, 1.42),
        dist_row(m, 1.0, 1.0, 2.0, 0.0, 0.05, 0.33),
        dist_row(m, 1.0, 2.0, 1.0, 0.0, 0.05, 0.66),
    };
}

std::vector<TableRow> static_max_velocity_table() {
    const SafetyMode m = SafetyMode::kStatic;
    return {
        vel_row(m, 1.25, 1.0, 1.0, 0.0, 0.05, 1.48, "corridor"),
        vel_row(m, 1.25, 0.5, 0.5, 0.0, 0.025, 1.09, "corridor"),
        vel_row(m, 1.25, 2.0, 2.0, 0.0, 0.1, 1.85, "corridor"),
        vel_row(m, 1.25, 1.0, 2.0, 0.0, 0.05, 2.08, "corridor"),
        vel_row(m, 1.25, 2.0, 1.0, 0.0, 0.05, 1.43, "corridor"),
        vel_row(m, 0.25, 1.0, 1.0, 0.0, 0.05, 0.61, "door"),
        vel_row(m, 0.25, 0.5, 0.5, 0.0, 0.025, 0.47, "door"),
        vel_row(m, 0.25, 2.0, 2.0, 0.0, 0.1, 0.63, "door"),
        vel_row(m, 0.25, 1.0, 2.0, 0.0, 0.05, 0.85, "door"),
        vel_row(m, 0.25, 2.0, 1.0, 0.0, 0.05, 0.56, "door"),
    };
}

std::vector<TableRow> passive_min_distance_table() {
    const SafetyMode m = SafetyMode::kPassive;
    // The quoted column repeats the static-safety numbers; the closed form
    // disagrees, and the rows get flagged accordingly.
    return {
        dist_row(m, 1.0, 1.0, 1.0, 1.0, 0.05, 0.61),
        dist_row(m, 0.5, 0.5, 0.5, 0.5, 0.025, 0.28),
        dist_row(m, 2.0, 2.0, 2.0, 2.0, 0.1, 1.42),
        dist_row(m, 1.0, 1.0, 2.0, 1.0, 0.05, 0.33),
        dist_row(m, 1.0, 2.0, 1.0, 2.0, 0.05, 0.66),
    };
}

std::vector<TableRow> passive_max_velocity_table() {
    const SafetyMode m = SafetyMode::kPassive;
    return {
        vel_row(m, 1.25, 1.0, 1.0, 1.0, 0.05, 0.77, "corridor"),
        vel_row(m, 1.25, 0.5, 0.5, 0.5, 0.025, 0.69, "corridor"),
        vel_row(m, 1.25, 2.0, 2.0, 2.0, 0.1, 0.61, "corridor"),
        vel_row(m, 1.25, 1.0, 2.0, 1.0, 0.05, 0.4, "corridor"),
        vel_row(m, 1.25, 2.0, 1.0, 2.0, 0.05, 1.3, "corridor"),
        vel_row(m, 0.25, 1.0, 1.0, 1.0, 0.05, 0.12, "door"),
        vel_row(m, 0.25, 0.5, 0.5, 0.5, 0.025, 0.18, "door"),
        vel_row(m, 0.25, 2.0, 2.0, 2.0, 0.1, 0.0, "door"),
        vel_row(m, 0.25, 1.0, 2.0, 1.0, 0.05, 0.26, "door"),
        vel_row(m, 0.25, 2.0, 1.0, 2.0, 0.05, 1.0, "door"),
    };
}

std::string format_tables(const std::vector<TableRow>& rows, const std::string& title,
                          bool velocity_table) {
    std::ostringstream out;
    out << title << "\n";
    out << (velocity_table ? "  label     dist      A      b      V    eps   v_max(full)      2dp"
                           : "  label        v      A      b      V    eps    dist(full)      2dp");
    out << "    ref  flag\n";
    char line[160];
    for (const TableRow& row : rows) {
        std::snprintf(line, sizeof(line),
                      "  %-8s %5.3f  %5.2f  %5.2f  %5.2f  %5.3f  %12.6f  %7.2f  %5.2f  %s\n",
                      row.label.empty() ? "-" : row.label.c_str(),
                      velocity_table ? row.dist : row.v, row.A, row.b, row.V, row.eps,
                      row.computed, round2(row.computed), row.reference,
                      row.consistent ? "ok" : "formula-inconsistent");
        out << line;
    }
    return out.str();
}

}  // namespace dwsafe
