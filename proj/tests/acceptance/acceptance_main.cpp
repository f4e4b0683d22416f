#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "CLI11.hpp"

#include "criteria.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-13"};
  std::string out_dir = "acceptance_out";
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<int> only;
  app.add_option("--out-dir", out_dir, "where per-criterion CSV files go");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "run just these criteria (13 reruns whatever else ran)");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(out_dir);
  acceptance::Options opt;
  opt.jobs = jobs;
  const std::set<int> chosen(only.begin(), only.end());
  std::map<int, std::string> first_csv;
  bool all = true;
  std::ofstream summary(fs::path(out_dir) / "acceptance.csv", std::ios::binary);
  summary << "criterion,pass,seconds\n";

  auto report = [&](int id, bool pass, double secs, const std::string& title, const std::string& detail) {
    std::printf("criterion %2d %s  [%.1fs] %s: %s\n", id, pass ? "PASS" : "FAIL", secs, title.c_str(), detail.c_str());
    std::fflush(stdout);
    summary << id << ',' << (pass ? "true" : "false") << ',' << static_cast<long long>(secs + 0.5) << "\n";
  };

  for (const auto& c : acceptance::criteria()) {
    if (!chosen.empty() && !chosen.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    acceptance::Outcome o;
    try {
      o = c.run(opt);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    first_csv[c.id] = o.csv;
    std::ofstream out(fs::path(out_dir) / ("c" + std::to_string(c.id) + ".csv"), std::ios::binary);
    out << o.csv;
    all = all && o.pass;
    report(c.id, o.pass, secs, c.title, o.detail);
  }

  if (chosen.empty() || chosen.count(13)) {
    // Rerun everything that ran above with the same seeds and compare bytes.
    const auto start = std::chrono::steady_clock::now();
    std::vector<int> differ;
    for (const auto& c : acceptance::criteria()) {
      const auto it = first_csv.find(c.id);
      if (it == first_csv.end()) continue;
      std::string again;
      try {
        again = c.run(opt).csv;
      } catch (const std::exception&) {
        again = "<exception>";
      }
      if (again != it->second || again.empty()) differ.push_back(c.id);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string detail = std::to_string(first_csv.size()) + " criteria rerun";
    if (differ.empty()) {
      detail += ", every CSV byte-identical";
    } else {
      detail += ", CSV differs for";
      for (int id : differ) detail += " " + std::to_string(id);
    }
    const bool pass = differ.empty() && !first_csv.empty();
    all = all && pass;
    report(13, pass, secs, "determinism", detail);
  }
  return all ? 0 : 1;
}
