#pragma once

#include <string>
#include <vector>

#include "dwsafe/types.hpp"

namespace dwsafe {

// One row of the distance or velocity tables: the parameter configuration,
// the value the closed form yields, and the bundled reference value used for
// regression (2-decimal print precision).
struct TableRow {
    double v = 0.0;     // current velocity [m/s] (distance tables)
    double dist = 0.0;  // available distance [m] (velocity tables)
    double A = 0.0;
    double b = 0.0;
    double V = 0.0;  // obstacle bound; unused for static rows
    double eps = 0.0;
    double computed = 0.0;
    double reference = 0.0;  // quoted 2-decimal value
    bool consistent = false;  // |round2(computed) - reference| <= 0.01
    std::string label;
};

std::vector<TableRow> static_min_distance_table();
std::vector<TableRow> static_max_velocity_table();   // 5 corridor rows + 5 door rows
std::vector<TableRow> passive_min_distance_table();
std::vector<TableRow> passive_max_velocity_table();  // 5 corridor rows + 5 door rows

// Evaluates one user-supplied configuration.
TableRow make_distance_row(SafetyMode mode, double v, double A, double b, double V, double eps);
TableRow make_velocity_row(SafetyMode mode, double dist, double A, double b, double V, double eps);

// Human-readable rendering: full precision plus 2-decimal columns, with an
// inconsistency flag on rows where the closed form disagrees with the
// reference value by more than 0.01.
std::string format_tables(const std::vector<TableRow>& rows, const std::string& title,
                          bool velocity_table);

}  // namespace dwsafe
