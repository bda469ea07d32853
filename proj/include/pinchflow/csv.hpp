#pragma once

// Time-series CSV output: fixed column set, '.' decimal separator regardless
// of locale, 17 significant digits so doubles round-trip exactly.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace pinchflow {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SeriesRow {
  double t = 0.0;
  double dt = 0.0;
  double maxH = 0.0;
  double maxA2 = 0.0;
  double maxRatio = 0.0;
  double minQ = 0.0;
  double minU = 0.0;
  double gradRatio = 0.0;
  long neckCount = 0;
  std::string event;  // empty for plain steps
};

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {
    out_ << "t,dt,maxH,maxA2,maxRatio,minQ,minU,gradRatio,neckCount,event\n";
  }

  void row(const SeriesRow& r) {
    out_ << format_g17(r.t) << ',' << format_g17(r.dt) << ',' << format_g17(r.maxH) << ','
         << format_g17(r.maxA2) << ',' << format_g17(r.maxRatio) << ',' << format_g17(r.minQ)
         << ',' << format_g17(r.minU) << ',' << format_g17(r.gradRatio) << ',' << r.neckCount
         << ',' << r.event << '\n';
  }

 private:
  std::ostream& out_;
};

}  // namespace pinchflow
