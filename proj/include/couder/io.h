#pragma once

// JSON file formats. Every object carries "version": 1. TM sequences and
// metrics are JSON Lines; the rest are single objects.

#include <iosfwd>
#include <string>
#include <vector>

#include "couder/evaluate.h"
#include "couder/model.h"
#include "couder/optimize.h"
#include "couder/round.h"

namespace couder::io {

inline constexpr int kFormatVersion = 1;

// Lines {"version", "t", "window", "tm"}; the window is repeated per line
// so any prefix of a file is itself a valid sequence.
void WriteTmSequence(std::ostream& out, const TmSequence& seq);
TmSequence ReadTmSequence(std::istream& in);

void WritePhysical(std::ostream& out, const PhysicalTopology& phys);
PhysicalTopology ReadPhysical(std::istream& in);

// {"mu", "beta" (nullable), "d", "omega": [{"src", "dst", "via", "w"}]}.
void WriteSolution(std::ostream& out, const FractionalSolution& sol);
FractionalSolution ReadSolution(std::istream& in);

void WriteIntegerTopology(std::ostream& out, const IntegerTopology& x);
IntegerTopology ReadIntegerTopology(std::istream& in);

struct RoundingSummary {
  std::string method;
  int goodness = 0;
  double violation_ratio = 0.0;
  int iterations_run = 0;

  bool operator==(const RoundingSummary&) const = default;
};
void WriteRoundingSummary(std::ostream& out, const RoundingSummary& r);
RoundingSummary ReadRoundingSummary(std::istream& in);

// One metrics line per evaluated TM. An infinite MLU is written as null.
struct MetricsLine {
  double t = 0.0;
  double mlu = 0.0;
  double ahc = 1.0;
  double direct_fraction = 1.0;
  double max_sensitivity = 0.0;
  bool feasible = true;
  int epoch = -1;
  int stage = 0;

  bool operator==(const MetricsLine&) const = default;
};
void WriteMetrics(std::ostream& out, const std::vector<MetricsLine>& lines);
std::vector<MetricsLine> ReadMetrics(std::istream& in);

// Whole-file helpers; errors surface as invalid-input.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::string& contents);

}  // namespace couder::io
