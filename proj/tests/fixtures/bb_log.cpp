// Black box with a hidden domain: f(x) = (log x)^2 for x > 0, but the
// process aborts for x <= 0 instead of reporting anything.  Models a solver
// input region that only reveals itself by crashing.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

int main() {
  std::string all;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, stdin)) > 0) all.append(buf, n);
  char* end = nullptr;
  const double x = std::strtod(all.c_str(), &end);
  if (end == all.c_str()) return 3;
  if (!(x > 0.0)) std::abort();
  const double lx = std::log(x);
  std::printf("%.17g\n", lx * lx);
  return 0;
}
