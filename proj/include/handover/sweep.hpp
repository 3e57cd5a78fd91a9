#pragma once

#include <iosfwd>
#include <vector>

#include "handover/optimizer.hpp"

namespace handover {

struct SweepSpec {
  std::vector<double> ch_values;  // nonempty, strictly increasing, all > 0
  double cr = 1.0;
  DelayDistribution delay;
  SearchDomain domain;
  double tol = kDefaultTol;
};

/// 40 log-spaced points in [0.1, 20].
std::vector<double> default_ch_values();

struct SweepRow {
  double ch = 0.0;
  double cr = 0.0;
  double t_star = 0.0;
  double a_star = 0.0;
  double cost_star = 0.0;
  double expected_waiting = 0.0;
  double expected_visits = 0.0;
};

/// One optimization per ch value. The expensive grid scan is shared across
/// rows (node expectations do not depend on the rates); per-row argmin and
/// refinement reproduce optimize() bit-for-bit. Rows may be computed in
/// parallel; the returned order follows ch_values.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// CSV with header ch,cr,t_star,a_star,cost_star,expected_waiting,expected_visits
/// one row per ch value, 12 significant digits, '\n' line endings.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace handover
