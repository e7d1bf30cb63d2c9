#ifndef TWISTLAB_TABLE_HPP
#define TWISTLAB_TABLE_HPP

#include <string>

#include "twistlab/core_maps.hpp"
#include "twistlab/csv.hpp"
#include "twistlab/foliation.hpp"

namespace twistlab {

/// Leaf values eta(theta_i, c_j) on sorted nodes; theta nodes lie in [0, 1)
/// and wrap periodically.
struct FoliationTable {
  Eigen::VectorXd theta_nodes;
  Eigen::VectorXd c_nodes;
  Grid eta;  // theta x c
};

/// Bilinear interpolation of the table, periodic in theta, clamped in c.
FoliationSpec table_foliation(const FoliationTable& table, const std::string& name = "user_table");
FoliationTable tabulate_foliation(const FoliationSpec& fol, int n_theta, int n_c, const Interval& window);
/// From (theta, c, eta) rows in any order.
FoliationTable foliation_table_from_csv(const csv::Table& rows);

/// Map values on a (x, r) grid, x nodes in [0, 1); stores F1 - x and F2.
struct MapTable {
  Eigen::VectorXd x_nodes;
  Eigen::VectorXd r_nodes;
  Grid shift;  // F1 - x
  Grid f2;
};

/// Bilinear lift; inverse by Newton iteration with finite-difference
/// Jacobians, differential left to the finite-difference fallback.
TwistMapSpec table_map(const MapTable& table, const std::string& name = "user_table");
MapTable tabulate_map(const TwistMapSpec& map, int nx, int nr, const Interval& r_range);
/// From (x, r, F1, F2) rows in any order.
MapTable map_table_from_csv(const csv::Table& rows);

}  // namespace twistlab

#endif  // TWISTLAB_TABLE_HPP
