#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "missbm/cli.hpp"
#include "missbm/io.hpp"

using namespace missbm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("block list parsing") {
  CHECK(parse_blocks("1:4") == std::vector<int>{1, 2, 3, 4});
  CHECK(parse_blocks("2,4") == std::vector<int>{2, 4});
  CHECK(parse_blocks("3") == std::vector<int>{3});
  CHECK_THROWS(parse_blocks("4:1"));
  CHECK_THROWS(parse_blocks("a"));
}

TEST_CASE("full command chain") {
  TempDir dir("missbm-cli-chain");
  REQUIRE(run({"--seed", "3", "generate", "--n", "50", "--q", "2", "--pi-in", "0.5", "--pi-out", "0.05", "--out",
               dir / "g.csv", "--labels-out", dir / "z.csv"})
              .code == 0);
  REQUIRE(run({"observe", "-i", dir / "g.csv", "--sampling", "block-node", "--parameters", "0.9,0.4", "--clusters",
               dir / "z.csv", "--out", dir / "o.csv"})
              .code == 0);
  const Run fit = run({"fit", "-i", dir / "o.csv", "--sampling", "block-node", "--blocks", "1:3", "--out",
                       dir / "fit.json", "--monitoring", dir / "mon.csv", "--labels-out", dir / "best.csv"});
  REQUIRE(fit.code == 0);
  CHECK(fit.out.find("best Q") != std::string::npos);
  REQUIRE(run({"impute", "-i", dir / "o.csv", "--fit", dir / "fit.json", "--out", dir / "imp.csv"}).code == 0);
  const Run a = run({"eval-ari", "--a", dir / "z.csv", "--b", dir / "fit.json"});
  CHECK(a.code == 0);
  CHECK(std::stod(a.out) > 0.5);
  const Run u = run({"eval-auc", "--truth", dir / "g.csv", "--observed", dir / "o.csv", "--imputed", dir / "imp.csv"});
  CHECK(u.code == 0);
  CHECK(std::stod(u.out) > 0.5);
  const Run c = run({"compare-designs", "-i", dir / "o.csv", "--designs", "node,block-node", "--blocks", "2",
                     "--out", dir / "cmp.csv"});
  CHECK(c.code == 0);
  std::ifstream cmp(dir / "cmp.csv");
  std::string header;
  std::getline(cmp, header);
  CHECK(header == "design,Q,icl");

  std::ifstream imp(dir / "imp.csv");
  const Eigen::MatrixXd m = read_real_matrix(imp);
  CHECK(m.rows() == 50);
}

TEST_CASE("exit codes") {
  TempDir dir("missbm-cli-errors");
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"fit", "-i", dir / "absent.csv", "--sampling", "dyad"}).code == 2);
  CHECK(run({"generate", "--n", "10", "--q", "2", "--pi-in", "1.5", "--pi-out", "0.1", "--out", dir / "g.csv"}).code ==
        2);
  REQUIRE(run({"generate", "--n", "10", "--q", "1", "--pi-in", "0.5", "--pi-out", "0.5", "--out", dir / "g.csv"})
              .code == 0);
  CHECK(run({"fit", "-i", dir / "g.csv", "--sampling", "nonsense"}).code == 2);
  CHECK(run({"observe", "-i", dir / "g.csv", "--sampling", "block-node", "--parameters", "0.5,0.5", "--out",
             dir / "o.csv"})
            .code == 2);
}
