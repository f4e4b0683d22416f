#pragma once

#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Options {
  int jobs = 1;
};

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string csv;  // per-criterion data, compared byte-for-byte on rerun
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome(const Options&)> run;
};

const std::vector<Criterion>& criteria();

}  // namespace acceptance
