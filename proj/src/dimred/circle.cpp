#include <cmath>

#include "cliplab/dimred.hpp"

namespace cliplab::dimred {

namespace {

double along(const CirclePoint& pt, Axis axis) { return axis == Axis::X ? pt.x : pt.y; }

void finish(GroupProjection& g, std::size_t total) {
  if (g.n_variables > 0) {
    g.mean_cos /= static_cast<double>(g.n_variables);
    g.mean_scalar_product /= static_cast<double>(g.n_variables);
  }
  g.pct_variables = total == 0 ? 0.0 : 100.0 * static_cast<double>(g.n_variables) / static_cast<double>(total);
}

}  // namespace

CorrelationCircle correlation_circle(const PcaModel& model, std::size_t f_x, std::size_t f_y, double cos2_min) {
  const auto n_factors = static_cast<std::size_t>(model.loadings.cols());
  if (f_x >= n_factors || f_y >= n_factors || f_x == f_y) {
    throw Error(ErrorKind::InvalidArgument, "circle factors must be two distinct existing factors");
  }
  CorrelationCircle c;
  c.f_x = f_x;
  c.f_y = f_y;
  c.cos2_min = cos2_min;
  for (std::size_t v = 0; v < model.variables.size(); ++v) {
    CirclePoint pt;
    pt.variable = v;
    pt.name = model.names[v];
    pt.kind = model.kinds[v];
    pt.x = model.correlation(v, f_x);
    pt.y = model.correlation(v, f_y);
    pt.cos2 = pt.x * pt.x + pt.y * pt.y;
    switch (pt.kind) {
      case ColumnKind::TakenIndicator: c.taken = pt; break;
      case ColumnKind::LeftIndicator: c.left = pt; break;
      case ColumnKind::Embedding:
        ++c.n_embedding;
        if (pt.cos2 > cos2_min) c.points.push_back(std::move(pt));
        break;
    }
  }
  c.kept_fraction =
      c.n_embedding == 0 ? 0.0 : static_cast<double>(c.points.size()) / static_cast<double>(c.n_embedding);
  return c;
}

Axis indicator_axis(const CorrelationCircle& circle, double min_cos2) {
  if (!circle.taken) throw Error(ErrorKind::AxisNotFound, "no taken indicator in the model");
  const auto& t = *circle.taken;
  const Axis axis = std::fabs(t.y) > std::fabs(t.x) ? Axis::Y : Axis::X;
  const double v = along(t, axis);
  if (v * v < min_cos2) {
    throw Error(ErrorKind::AxisNotFound, "taken indicator is not represented on either factor (cos2 = " +
                                             std::to_string(v * v) + ")");
  }
  return axis;
}

ProjectionStats projection_stats(const CorrelationCircle& circle, Axis axis) {
  if (!circle.taken) throw Error(ErrorKind::AxisNotFound, "no taken indicator in the model");
  const auto& t = *circle.taken;
  const double pole = along(t, axis);
  const double norm = std::hypot(t.x, t.y);
  if (pole == 0.0 || !(norm > 0.0)) throw Error(ErrorKind::AxisNotFound, "taken indicator has no direction");
  const double ux = t.x / norm;
  const double uy = t.y / norm;

  ProjectionStats out;
  out.axis = axis;
  out.assigned_taken.reserve(circle.points.size());
  for (const auto& pt : circle.points) {
    const double proj = along(pt, axis);
    const bool is_taken = proj * pole > 0.0;
    auto& g = is_taken ? out.taken : out.left;
    ++g.n_variables;
    g.mean_cos += std::fabs(proj);
    g.mean_scalar_product += std::fabs(pt.x * ux + pt.y * uy);
    out.assigned_taken.push_back(is_taken);
  }
  finish(out.taken, circle.points.size());
  finish(out.left, circle.points.size());
  return out;
}

AlignedMeans aligned_group_means(std::span<const CorrelationCircle> circles, std::span<const ProjectionStats> stats) {
  if (circles.size() != stats.size()) throw Error(ErrorKind::LengthMismatch, "one projection per circle");
  AlignedMeans out;
  for (std::size_t k = 0; k < circles.size(); ++k) {
    const auto& c = circles[k];
    if (!c.taken) continue;
    const double angle = std::atan2(c.taken->y, c.taken->x);
    const double cs = std::cos(-angle);
    const double sn = std::sin(-angle);
    auto rot_x = [&](double x, double y) { return cs * x - sn * y; };
    auto rot_y = [&](double x, double y) { return sn * x + cs * y; };

    ++out.n_cases;
    out.taken_indicator_x += rot_x(c.taken->x, c.taken->y);
    out.taken_indicator_y += rot_y(c.taken->x, c.taken->y);
    if (c.left) {
      out.left_indicator_x += rot_x(c.left->x, c.left->y);
      out.left_indicator_y += rot_y(c.left->x, c.left->y);
    }
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto& pt = c.points[i];
      const double x = rot_x(pt.x, pt.y);
      const double y = rot_y(pt.x, pt.y);
      if (stats[k].assigned_taken.at(i)) {
        out.taken_x += x;
        out.taken_y += y;
        ++out.n_taken_vars;
      } else {
        out.left_x += x;
        out.left_y += y;
        ++out.n_left_vars;
      }
    }
  }
  if (out.n_cases > 0) {
    const double nc = static_cast<double>(out.n_cases);
    out.taken_indicator_x /= nc;
    out.taken_indicator_y /= nc;
    out.left_indicator_x /= nc;
    out.left_indicator_y /= nc;
  }
  if (out.n_taken_vars > 0) {
    out.taken_x /= static_cast<double>(out.n_taken_vars);
    out.taken_y /= static_cast<double>(out.n_taken_vars);
  }
  if (out.n_left_vars > 0) {
    out.left_x /= static_cast<double>(out.n_left_vars);
    out.left_y /= static_cast<double>(out.n_left_vars);
  }
  return out;
}

}  // namespace cliplab::dimred
