// Copyright 2026 The evrmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Drives the rmpc executable end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evrmpc/evaluation.hpp"
#include "evrmpc/simulator.hpp"

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome
{
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir()
{
  const fs::path dir = fs::temp_directory_path() / "evrmpc_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome rmpc(const std::string & args, const std::string & env = {})
{
  const fs::path dir = work_dir();
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" EVRMPC_RMPC_BIN "' " + args + " > '" +
                          (dir / "stdout.txt").string() + "' 2> '" + (dir / "stderr.txt").string() +
                          "'";
  const int status = std::system(cmd.c_str());
  Outcome r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "stdout.txt");
  r.err = slurp(dir / "stderr.txt");
  return r;
}

fs::path fresh(const std::string & name)
{
  const fs::path p = work_dir() / name;
  fs::remove_all(p);
  return p;
}

void write_text(const fs::path & p, const std::string & text)
{
  std::ofstream(p) << text;
}

int count_lines(const fs::path & p)
{
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) {
    n += !line.empty();
  }
  return n;
}

TEST(Cli, BoundsPrintsTheDisturbanceBox)
{
  const Outcome r = rmpc("bounds");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("w_lo=-0.134253"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("w_hi=0.135929"), std::string::npos) << r.out;
}

TEST(Cli, HelpExitsCleanly)
{
  EXPECT_EQ(rmpc("--help").code, 0);
  EXPECT_EQ(rmpc("simulate --help").code, 0);
}

TEST(Cli, SimulateWritesItsArtifacts)
{
  const fs::path out = fresh("sim");
  const Outcome r = rmpc("simulate --controller nominal --horizon 5 --steps 20 --seed 3 --out " +
                     out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("nominal N=5 seed=3 steps=20"), std::string::npos) << r.out;
  for (const char * f : {"log.csv", "report.json", "config.json", "headway.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(count_lines(out / "log.csv"), 21);
  EXPECT_EQ(count_lines(out / "headway.csv"), 21);
  const json rep = json::parse(slurp(out / "report.json"));
  for (const char * key : {"E_bat_Wh", "E_mech_Wh", "E_regen_Wh", "j_rms", "mode", "units",
                           "controller", "horizon", "seed", "steps", "violation_steps",
                           "first_violation_s", "fallback_steps", "aborted"}) {
    EXPECT_TRUE(rep.contains(key)) << key;
  }
  EXPECT_EQ(rep["steps"], 20);
  EXPECT_EQ(rep["controller"], "nominal");
  const json cfg = json::parse(slurp(out / "config.json"));
  EXPECT_EQ(cfg["horizon"], 5);
  EXPECT_EQ(cfg["disturbance"]["seed"], 3);
  EXPECT_TRUE(cfg["v_cruise"].is_number());
}

TEST(Cli, EvaluateReproducesTheRunReport)
{
  const fs::path out = fresh("eval");
  ASSERT_EQ(rmpc("simulate --controller nominal --horizon 4 --steps 15 --out " + out.string()).code,
            0);
  const fs::path again = fresh("eval_again");
  const Outcome r = rmpc("evaluate " + (out / "log.csv").string() + " --out " + again.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json a = json::parse(slurp(out / "report.json"));
  const json b = json::parse(slurp(again / "report.json"));
  EXPECT_NEAR(a["E_bat_Wh"].get<double>(), b["E_bat_Wh"].get<double>(), 1e-12);
  EXPECT_NEAR(a["j_rms"].get<double>(), b["j_rms"].get<double>(), 1e-12);

  const Outcome lit = rmpc("evaluate " + (out / "log.csv").string() + " --energy-mode paper");
  ASSERT_EQ(lit.code, 0) << lit.err;
  EXPECT_NE(lit.out.find("N*h"), std::string::npos) << lit.out;
}

TEST(Cli, FlagsOverrideTheConfigFile)
{
  const fs::path cfg = work_dir() / "override.json";
  write_text(cfg, R"({"horizon": 7, "controller": "robust", "steps": 4})");
  const fs::path out = fresh("override");
  const Outcome r = rmpc("simulate --config " + cfg.string() + " --horizon 3 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json c = json::parse(slurp(out / "config.json"));
  EXPECT_EQ(c["horizon"], 3);
  EXPECT_EQ(c["controller"], "robust");
  EXPECT_EQ(c["steps"], 4);
}

TEST(Cli, SolverToleranceComesFromTheEnvironment)
{
  const fs::path out = fresh("tol");
  const Outcome r = rmpc("simulate --controller nominal --horizon 3 --steps 3 --out " + out.string(),
                     "RMPC_SOLVER_TOL=1e-7");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(json::parse(slurp(out / "config.json"))["solver"]["tol"].get<double>(), 1e-7);
  EXPECT_EQ(rmpc("bounds", "RMPC_SOLVER_TOL=tight").code, 2);
}

TEST(Cli, ConfigurationErrorsExitWithTwo)
{
  EXPECT_EQ(rmpc("simulate --controller pid").code, 2);
  EXPECT_EQ(rmpc("simulate --horizon 0 --steps 2").code, 2);
  EXPECT_EQ(rmpc("simulate --config /nonexistent.json").code, 2);
  EXPECT_EQ(rmpc("simulate --cycle /nonexistent.csv --steps 2").code, 2);
  EXPECT_EQ(rmpc("frobnicate").code, 2);
  EXPECT_EQ(rmpc("").code, 2);
  const fs::path cfg = work_dir() / "unknown_key.json";
  write_text(cfg, R"({"horizn": 7})");
  const Outcome r = rmpc("simulate --config " + cfg.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("horizn"), std::string::npos) << r.err;
  write_text(cfg, "{not json");
  EXPECT_EQ(rmpc("simulate --config " + cfg.string()).code, 2);
}

TEST(Cli, StrictViolationExitsWithFour)
{
  const fs::path cfg = work_dir() / "strict.json";
  write_text(cfg, R"({"ds0": 1.0, "steps": 5})");
  const fs::path out = fresh("strict");
  const Outcome r = rmpc("simulate --strict --controller nominal --horizon 3 --config " + cfg.string() +
                     " --out " + out.string());
  EXPECT_EQ(r.code, 4) << r.err;
  const json rep = json::parse(slurp(out / "report.json"));
  EXPECT_EQ(rep["aborted"], true);
  EXPECT_EQ(rep["first_violation_s"], 0.0);
  // Without --strict the same run completes and reports the violation.
  const Outcome lax = rmpc("simulate --controller nominal --horizon 3 --config " + cfg.string() +
                       " --out " + out.string());
  EXPECT_EQ(lax.code, 0) << lax.err;
}

TEST(Cli, ExhaustedRetryBudgetExitsWithThree)
{
  const fs::path cycle = work_dir() / "stopped.csv";
  write_text(cycle, "t_s,v_mps\n0,0\n10,0\n");
  const fs::path cfg = work_dir() / "budget.json";
  write_text(cfg, R"({"v0": 10.0, "ds0": 12.1, "steps": 5, "solver": {"retry_budget": 0}})");
  const Outcome r = rmpc("simulate --controller nominal --horizon 4 --cycle " + cycle.string() +
                     " --config " + cfg.string() + " --out " + fresh("budget").string());
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, SweepWritesOneRowPerHorizon)
{
  const fs::path out = fresh("sweep");
  const Outcome r = rmpc("sweep --controller nominal --horizons 3,5 --steps 10 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(out / "sweep.csv"));
  EXPECT_EQ(count_lines(out / "sweep.csv"), 3);
  EXPECT_EQ(slurp(out / "sweep.csv").rfind("N,E_bat_Wh,", 0), 0u);
  EXPECT_TRUE(fs::exists(out / "N3" / "log.csv"));
  EXPECT_TRUE(fs::exists(out / "N5" / "report.json"));
}

TEST(Cli, ReplayModeUsesTheGivenSequence)
{
  const fs::path seq = work_dir() / "replay.txt";
  write_text(seq, "# constant push\n0.05\n0.05\n0.05\n0.05\n");
  const fs::path out = fresh("replay");
  const Outcome r = rmpc("simulate --controller nominal --horizon 3 --steps 4 --dist-mode replay "
                     "--replay " + seq.string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const evrmpc::SimLog log = evrmpc::read_log_csv((out / "log.csv").string(), 0.2);
  ASSERT_EQ(log.steps.size(), 4u);
  for (const auto & s : log.steps) {
    EXPECT_NEAR(s.w, 0.05, 1e-12);
  }
  // Five steps need five samples.
  EXPECT_EQ(rmpc("simulate --controller nominal --horizon 3 --steps 5 --dist-mode replay --replay " +
                 seq.string() + " --out " + out.string()).code,
            2);
}

TEST(Cli, EffmapNoneMeansUnitEfficiency)
{
  const fs::path out = fresh("noeff");
  const Outcome r = rmpc("simulate --controller nominal --horizon 3 --steps 10 --effmap none --out " +
                     out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(slurp(out / "report.json"));
  EXPECT_NEAR(rep["E_bat_Wh"].get<double>(),
              rep["E_mech_Wh"].get<double>() - rep["E_regen_Wh"].get<double>(), 1e-12);
}

}  // namespace
