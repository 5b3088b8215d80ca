// Plant-style black box: two inputs, twelve outputs on one line.
//   out  1      objective            f = x1 + x2
//   outs 2..8   relaxable values     ck <= 0 required
//   outs 9..12  pass/fail flags      0 = pass, 1 = fail
// The feasible optimum is f = 1 on the segment x1 + x2 = 1 inside the box.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

int main() {
  std::vector<double> x;
  std::string all;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, stdin)) > 0) all.append(buf, n);
  const char* p = all.c_str();
  char* end = nullptr;
  for (double v = std::strtod(p, &end); end != p; v = std::strtod(p, &end)) {
    x.push_back(v);
    p = end;
  }
  if (x.size() != 2) return 3;
  const double x1 = x[0], x2 = x[1];

  const double f = x1 + x2;
  const double c1 = 1.0 - x1 - x2;   // active at the optimum
  const double c2 = x1 - 7.0;        // violated at the canonical start (8, 8)
  const double c3 = x2 - 7.0;        // violated at the canonical start (8, 8)
  const double c4 = -x1 - 5.0;
  const double c5 = -x2 - 5.0;
  const double c6 = x1 - x2 - 6.0;
  const double c7 = x2 - x1 - 6.0;
  const double s1 = (x1 + x2 > 25.0) ? 1.0 : 0.0;
  const double s2 = (x1 < -2.0) ? 1.0 : 0.0;
  const double s3 = (x2 < -2.0) ? 1.0 : 0.0;
  const double s4 = (x1 + x2 < -8.0) ? 1.0 : 0.0;

  std::printf("%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g %g %g %g %g\n",
              f, c1, c2, c3, c4, c5, c6, c7, s1, s2, s3, s4);
  return 0;
}
