#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cli.hpp"
#include "spsc/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "spsc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = spsc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

double percent_after(const std::string& text, const std::string& label) {
  const std::regex re(label + R"(:\s+([0-9.]+)%)");
  std::smatch m;
  if (!std::regex_search(text, m, re)) throw std::runtime_error("no " + label + " in output");
  return std::stod(m[1]);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("spsc_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("budget prints the three efficiencies") {
  const auto r = run({"budget", "--isat", "452000", "--rep", "40e6", "--stages", "0.6,0.526,0.44,0.82,0.8"});
  REQUIRE(r.code == spsc::cli::kOk);
  CHECK(std::abs(percent_after(r.out, "end-to-end efficiency") - 1.13) <= 0.01);
  CHECK(std::abs(percent_after(r.out, "B_fib") - 3.58) <= 0.01);
  CHECK(std::abs(percent_after(r.out, "B_source") - 12.41) <= 0.01);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == spsc::cli::kUsage);
  CHECK(run({"frobnicate"}).code == spsc::cli::kUsage);
  CHECK(run({"budget", "--isat", "1"}).code == spsc::cli::kUsage);
  CHECK(run({"simulate", "--mode", "sideways", "-o", "x.csv"}).code == spsc::cli::kUsage);
  // out-of-range transmission is a precondition failure
  const auto r = run({"budget", "--isat", "452000", "--rep", "40e6", "--stages", "0.6,1.5"});
  CHECK(r.code == spsc::cli::kUsage);
  CHECK(r.err.find("transmission") != std::string::npos);
  CHECK(run({"--help"}).code == spsc::cli::kOk);
}

TEST_CASE("unreadable or malformed files exit with 3") {
  TempDir dir("format");
  CHECK(run({"correlate", "-i", dir / "missing.csv", "-o", dir / "h.csv"}).code == spsc::cli::kFormat);
  {
    std::ofstream f(dir / "bad.csv");
    f << "channel,time_ps\n0,12\n1,oops\n";
  }
  CHECK(run({"correlate", "-i", dir / "bad.csv", "-o", dir / "h.csv"}).code == spsc::cli::kFormat);
  {
    std::ofstream f(dir / "hist.csv");
    f << "not a histogram\n";
  }
  CHECK(run({"fit-g2", "-i", dir / "hist.csv"}).code == spsc::cli::kFormat);
}

TEST_CASE("a channel without tags is a computation error") {
  TempDir dir("empty");
  {
    std::ofstream f(dir / "tags.csv");
    f << "# duration_ps=1000000\nchannel,time_ps\n0,10\n0,500\n";
  }
  CHECK(run({"correlate", "-i", dir / "tags.csv", "-o", dir / "h.csv"}).code == spsc::cli::kComputation);
}

TEST_CASE("simulate is reproducible for a seed and independent of the thread count") {
  TempDir dir("determinism");
  const std::vector<std::string> base{"simulate", "--setup", "hom", "--pump-rate-per-ns", "0.1", "--duration-s", "0.002"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> a{"--seed", "7"};
    a.insert(a.end(), extra.begin(), extra.end());
    a.insert(a.end(), base.begin(), base.end());
    return a;
  };
  auto a = with({"--threads", "1"});
  a.insert(a.end(), {"-o", dir / "a.ptag"});
  auto b = with({"--threads", "3"});
  b.insert(b.end(), {"-o", dir / "b.ptag"});
  REQUIRE(run(a).code == spsc::cli::kOk);
  REQUIRE(run(b).code == spsc::cli::kOk);
  const std::string bytes = slurp(dir / "a.ptag");
  CHECK(bytes.size() > 1000);
  CHECK(bytes == slurp(dir / "b.ptag"));

  std::vector<std::string> c{"--seed", "8"};
  c.insert(c.end(), base.begin(), base.end());
  c.insert(c.end(), {"-o", dir / "c.ptag"});
  REQUIRE(run(c).code == spsc::cli::kOk);
  CHECK(bytes != slurp(dir / "c.ptag"));
}

TEST_CASE("simulate, correlate and fit-g2 chain through files") {
  TempDir dir("pipeline");
  REQUIRE(run({"simulate", "--pump-rate-per-ns", "0.3", "--duration-s", "0.01", "-o", dir / "tags.csv"}).code ==
          spsc::cli::kOk);
  const auto cor = run({"correlate", "-i", dir / "tags.csv", "-o", dir / "h.csv", "--bin-ps", "100", "--tau-max-ps",
                        "50000", "--plot", dir / "h.svg"});
  REQUIRE(cor.code == spsc::cli::kOk);
  const auto h = spsc::io::read_histogram(dir / "h.csv");
  CHECK(h.bins() == 1000);
  CHECK(h.normalized());
  CHECK(slurp(dir / "h.svg").find("<svg") != std::string::npos);

  const auto fit = run({"fit-g2", "-i", dir / "h.csv", "-o", dir / "fit.txt"});
  REQUIRE(fit.code == spsc::cli::kOk);
  const auto r = spsc::io::read_fit_result(fs::path(dir / "fit.txt"));
  CHECK(r.converged);
  // no background: the fit sits at or near zero
  CHECK(r.value("g2_zero") < 0.05);
}

TEST_CASE("overlap of a Gaussian map with a Gaussian of another waist") {
  TempDir dir("overlap");
  const auto f = spsc::FieldMap::gaussian(161, 161, 0.05, 0.05, 1.0, 1.0);
  spsc::io::write_field_map(fs::path(dir / "f.txt"), f);
  const auto r = run({"overlap", "--field1", dir / "f.txt", "--waist-um", "2", "--fit-gaussian"});
  REQUIRE(r.code == spsc::cli::kOk);
  std::smatch m;
  REQUIRE(std::regex_search(r.out, m, std::regex(R"(overlap = ([0-9.]+))")));
  CHECK(std::stod(m[1]) == doctest::Approx(0.64).epsilon(1e-3));
  CHECK(r.out.find("waists") != std::string::npos);
}
