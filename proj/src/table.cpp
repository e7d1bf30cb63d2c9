#include "twistlab/table.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "twistlab/numerics.hpp"

namespace twistlab {

namespace {

// Cell and weight of x in sorted nodes, periodic over [0, 1).
std::pair<std::pair<Eigen::Index, Eigen::Index>, double> periodic_cell(const Eigen::VectorXd& nodes, double x) {
  const Eigen::Index n = nodes.size();
  const double t = wrap_unit(x);
  const double* begin = nodes.data();
  const Eigen::Index k = std::upper_bound(begin, begin + n, t) - begin;  // nodes(k-1) <= t < nodes(k)
  if (k == 0 || k == n) {
    const double left = nodes(n - 1) - 1.0, right = nodes(0);
    const double tt = k == 0 ? t : t - 1.0;
    return {{n - 1, 0}, (tt - left) / (right - left)};
  }
  return {{k - 1, k}, (t - nodes(k - 1)) / (nodes(k) - nodes(k - 1))};
}

std::pair<Eigen::Index, double> clamped_cell(const Eigen::VectorXd& nodes, double c) {
  const Eigen::Index n = nodes.size();
  if (c <= nodes(0)) return {0, 0.0};
  if (c >= nodes(n - 1)) return {n - 2, 1.0};
  const double* begin = nodes.data();
  const Eigen::Index k = std::upper_bound(begin, begin + n, c) - begin;
  return {k - 1, (c - nodes(k - 1)) / (nodes(k) - nodes(k - 1))};
}

double bilinear(const Grid& v, const Eigen::VectorXd& tn, const Eigen::VectorXd& cn, double t, double c) {
  const auto [ti, s] = periodic_cell(tn, t);
  const auto [j, w] = clamped_cell(cn, c);
  const auto [i0, i1] = ti;
  return (1 - s) * ((1 - w) * v(i0, j) + w * v(i0, j + 1)) + s * ((1 - w) * v(i1, j) + w * v(i1, j + 1));
}

Eigen::VectorXd sorted_unique(const std::vector<double>& values) {
  std::set<double> s(values.begin(), values.end());
  Eigen::VectorXd out(static_cast<Eigen::Index>(s.size()));
  Eigen::Index k = 0;
  for (double v : s) out(k++) = v;
  return out;
}

Eigen::Index index_of(const Eigen::VectorXd& nodes, double v) {
  const double* begin = nodes.data();
  return std::lower_bound(begin, begin + nodes.size(), v) - begin;
}

void fill_from_rows(const csv::Table& rows, std::size_t columns, Eigen::VectorXd& a, Eigen::VectorXd& b,
                    std::vector<Grid*> fields, const char* what) {
  std::vector<double> as, bs;
  for (const auto& row : rows.rows) {
    if (row.size() < columns) throw ArgumentError(std::string(what) + ": short row");
    as.push_back(wrap_unit(row[0]));
    bs.push_back(row[1]);
  }
  a = sorted_unique(as);
  b = sorted_unique(bs);
  if (a.size() < 2 || b.size() < 2) throw ArgumentError(std::string(what) + ": need at least 2 x 2 nodes");
  if (static_cast<std::size_t>(a.size() * b.size()) != rows.rows.size())
    throw ArgumentError(std::string(what) + ": rows do not form a full grid");
  for (Grid* f : fields) f->setConstant(a.size(), b.size(), std::nan(""));
  for (std::size_t k = 0; k < rows.rows.size(); ++k) {
    const auto& row = rows.rows[k];
    const Eigen::Index i = index_of(a, wrap_unit(row[0])), j = index_of(b, row[1]);
    for (std::size_t f = 0; f < fields.size(); ++f) (*fields[f])(i, j) = row[2 + f];
  }
}

}  // namespace

FoliationSpec table_foliation(const FoliationTable& table, const std::string& name) {
  auto t = std::make_shared<const FoliationTable>(table);
  FoliationSpec f;
  f.name = name;
  f.domain = {table.c_nodes(0), table.c_nodes(table.c_nodes.size() - 1)};
  f.leaf = [t](double theta, double c) { return bilinear(t->eta, t->theta_nodes, t->c_nodes, theta, c); };
  return f;
}

FoliationTable tabulate_foliation(const FoliationSpec& fol, int n_theta, int n_c, const Interval& window) {
  FoliationTable t;
  t.theta_nodes = Eigen::VectorXd::LinSpaced(n_theta, 0.0, 1.0 - 1.0 / n_theta);
  t.c_nodes = numerics::uniform_nodes(window.lo, window.hi, n_c);
  t.eta.resize(n_theta, n_c);
  for (int i = 0; i < n_theta; ++i)
    for (int j = 0; j < n_c; ++j) t.eta(i, j) = fol.leaf(t.theta_nodes(i), t.c_nodes(j));
  return t;
}

FoliationTable foliation_table_from_csv(const csv::Table& rows) {
  FoliationTable t;
  fill_from_rows(rows, 3, t.theta_nodes, t.c_nodes, {&t.eta}, "foliation table");
  return t;
}

TwistMapSpec table_map(const MapTable& table, const std::string& name) {
  auto t = std::make_shared<const MapTable>(table);
  TwistMapSpec m;
  m.name = name;
  m.declared_strip = {0.0, 1.0, table.r_nodes(0), table.r_nodes(table.r_nodes.size() - 1)};
  m.forward = [t](const LiftPoint& p) {
    return LiftPoint(p.x() + bilinear(t->shift, t->x_nodes, t->r_nodes, p.x(), p.y()),
                     bilinear(t->f2, t->x_nodes, t->r_nodes, p.x(), p.y()));
  };
  auto forward = m.forward;
  m.inverse = [forward](const LiftPoint& q) {
    LiftPoint p = q - (forward(q) - q);
    for (int it = 0; it < 60; ++it) {
      const LiftPoint res = forward(p) - q;
      if (res.norm() <= 1e-13 * (1.0 + q.norm())) break;
      const Jacobian2 j = finite_difference_jacobian(forward, p);
      p -= j.fullPivLu().solve(res);
    }
    return p;
  };
  return m;
}

MapTable tabulate_map(const TwistMapSpec& map, int nx, int nr, const Interval& r_range) {
  MapTable t;
  t.x_nodes = Eigen::VectorXd::LinSpaced(nx, 0.0, 1.0 - 1.0 / nx);
  t.r_nodes = numerics::uniform_nodes(r_range.lo, r_range.hi, nr);
  t.shift.resize(nx, nr);
  t.f2.resize(nx, nr);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nr; ++j) {
      const LiftPoint img = map.forward(LiftPoint(t.x_nodes(i), t.r_nodes(j)));
      t.shift(i, j) = img.x() - t.x_nodes(i);
      t.f2(i, j) = img.y();
    }
  return t;
}

MapTable map_table_from_csv(const csv::Table& rows) {
  MapTable t;
  fill_from_rows(rows, 4, t.x_nodes, t.r_nodes, {&t.shift, &t.f2}, "map table");
  // rows hold F1; keep the periodic part F1 - x
  for (const auto& row : rows.rows) {
    const Eigen::Index i = index_of(t.x_nodes, wrap_unit(row[0])), j = index_of(t.r_nodes, row[1]);
    t.shift(i, j) = row[2] - row[0];
  }
  return t;
}

}  // namespace twistlab
