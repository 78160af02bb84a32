// weldmill run|check|opt|fmt <file>: front door to the pipeline.
//
// Exit status: 0 on success, 1 on a staged error (diagnostic JSON on stderr),
// 2 on a usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "weldmill/boundary.hpp"
#include "weldmill/json_value.hpp"
#include "weldmill/pipeline.hpp"
#include "weldmill/printer.hpp"

namespace {

using namespace weldmill;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  std::string file;
  std::string inputs;
  int threads = 1;
  std::int64_t memoryLimit = EngineConfig{}.memoryLimit;
  std::string strategy = "local";
  int level = 3;
  bool noOpt = false;
  std::map<std::string, bool> disabled;
  bool stats = false;
  bool dumpPasses = false;
  std::string out;
};

std::string readFile(const std::string& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, std::ios::in | mode);
  if (!in) throw UsageError("cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Manifest {
  TypeEnv env;
  std::map<std::string, Value> values;
  std::vector<std::string> order;
};

// [{"name": ..., "type": ..., "value": <json>} | {"name", "type", "file": <path>}, ...]
// File paths are relative to the manifest.
Manifest loadManifest(const std::string& path) {
  Manifest m;
  if (path.empty()) return m;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(readFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  if (doc.is_object() && doc.contains("inputs")) doc = doc["inputs"];
  if (!doc.is_array()) throw UsageError("manifest must be an array of inputs");
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() || !entry.contains("type") ||
        !entry["type"].is_string())
      throw UsageError("manifest entry needs string fields \"name\" and \"type\": " + entry.dump());
    std::string name = entry["name"];
    if (m.values.count(name)) throw UsageError("input '" + name + "' appears twice in the manifest");
    try {
      IrType t = parseType(entry["type"].get<std::string>());
      requireBoundaryType(t);
      Value v;
      if (entry.contains("value") == entry.contains("file"))
        throw UsageError("input '" + name + "' needs exactly one of \"value\" and \"file\"");
      if (entry.contains("value")) {
        v = valueFromJson(entry["value"], t);
      } else {
        fs::path p = entry["file"].get<std::string>();
        if (p.is_relative()) p = fs::path(path).parent_path() / p;
        std::string bytes = readFile(p.string(), std::ios::binary);
        v = decodeBoundary(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size(), t);
      }
      m.env.vars[name] = t;
      m.values[name] = std::move(v);
      m.order.push_back(name);
    } catch (const Error& e) {
      throw UsageError("input '" + name + "': " + e.what());
    }
  }
  return m;
}

// Inputs the program needs: the lambda's parameters, or else its free
// variables.
std::vector<std::string> requiredInputs(const ProgramUnit& unit) {
  std::vector<std::string> names;
  if (!unit.params.empty()) {
    for (const auto& p : unit.params) names.push_back(p.name);
  } else {
    for (const auto& n : freeVariables(unit.body)) names.push_back(n);
  }
  return names;
}

void matchManifest(const ProgramUnit& unit, const Manifest& m, bool needValues) {
  auto required = requiredInputs(unit);
  for (const auto& name : required) {
    if (!m.env.vars.count(name)) {
      if (!needValues) continue;
      throw UsageError("missing input for variable '" + name + "'");
    }
  }
  for (const auto& name : m.order) {
    if (std::find(required.begin(), required.end(), name) == required.end())
      throw UsageError("input '" + name + "' is not a variable of the program");
  }
  for (const auto& p : unit.params) {
    auto it = m.env.vars.find(p.name);
    if (it != m.env.vars.end() && p.type.valid() && !p.type.hasUnknowns() && !(p.type == it->second))
      throw UsageError("input '" + p.name + "' has type " + it->second.str() + " but the program declares " +
                       p.type.str());
  }
}

PipelineOptions pipelineOptions(const Settings& s) {
  PipelineOptions o;
  o.engine.threads = s.threads;
  o.engine.memoryLimit = s.memoryLimit;
  o.engine.strategy = s.strategy == "shared" ? MergeStrategy::Shared
                      : s.strategy == "global" ? MergeStrategy::Global
                                               : MergeStrategy::Local;
  o.level = s.level == 0 || s.noOpt ? OptLevel::none() : OptLevel::all();
  for (const auto& [pass, off] : s.disabled)
    if (off) o.level.set(pass, false);
  return o;
}

ProgramUnit loadProgram(const Settings& s) { return splitParams(parse(readFile(s.file))); }

int cmdRun(const Settings& s) {
  ProgramUnit unit = loadProgram(s);
  Manifest m = loadManifest(s.inputs);
  matchManifest(unit, m, true);
  RunOutput out = runProgram(unit, m.env, m.values, pipelineOptions(s));
  if (!boundaryTypeSupported(out.type))
    throw ApiError("EvaluateUnsupportedResultType",
                   "result type " + out.type.str() + " has no boundary form; wrap dictionaries in tovec");
  std::cout << valueToJson(out.value, out.type).dump() << "\n";
  if (s.stats) std::cout << out.stats.str();
  if (s.dumpPasses) std::cerr << reportText(out.reports);
  if (!s.out.empty()) {
    auto bytes = encodeBoundary(out.value, out.type);
    std::ofstream f(s.out, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw UsageError("cannot write '" + s.out + "'");
  }
  return 0;
}

int cmdCheck(const Settings& s) {
  ProgramUnit unit = loadProgram(s);
  Manifest m = loadManifest(s.inputs);
  matchManifest(unit, m, false);
  std::cout << checkProgram(unit, m.env).typed->type.str() << "\n";
  return 0;
}

int cmdOpt(const Settings& s) {
  ProgramUnit unit = loadProgram(s);
  Manifest m = loadManifest(s.inputs);
  matchManifest(unit, m, false);
  PipelineOptions o = pipelineOptions(s);
  CheckedProgram checked = checkProgram(unit, m.env);
  OptimizeResult r = optimize(checked.typed, checked.env, o.level, o.rewriteBudget);
  std::cout << print(joinParams(eraseAnnotations(r.program), unit.params)) << "\n";
  if (s.dumpPasses) std::cerr << reportText(r.reports);
  return 0;
}

int cmdFmt(const Settings& s) {
  std::cout << print(parse(readFile(s.file))) << "\n";
  return 0;
}

void addFile(CLI::App* cmd, Settings& s) {
  cmd->add_option("file", s.file, "Program file")->required();
}

void addInputs(CLI::App* cmd, Settings& s) {
  cmd->add_option("--inputs", s.inputs, "Input manifest (JSON)");
}

void addOptimizer(CLI::App* cmd, Settings& s) {
  cmd->add_option("-O", s.level, "Optimization level: -O0 or -O3")->check(CLI::IsMember({0, 3}));
  cmd->add_flag("--no-opt", s.noOpt, "Same as -O0");
  for (const auto& pass : passNames()) {
    if (pass == "tile") continue;
    cmd->add_flag("--no-" + pass, s.disabled[pass], "Disable the " + pass + " pass");
  }
  cmd->add_flag("--dump-passes", s.dumpPasses, "Print one report line per pass to standard error");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weldmill: parse, check, optimize and run IR programs"};
  app.require_subcommand(1);
  Settings s;

  auto* run = app.add_subcommand("run", "Evaluate a program and print its result as JSON");
  addFile(run, s);
  addInputs(run, s);
  run->add_option("--threads", s.threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--memory-limit", s.memoryLimit, "Engine memory limit in bytes")->check(CLI::NonNegativeNumber);
  run->add_option("--strategy", s.strategy, "Merge strategy")->check(CLI::IsMember({"local", "shared", "global"}));
  addOptimizer(run, s);
  run->add_flag("--stats", s.stats, "Append evaluation statistics");
  run->add_option("--out", s.out, "Also write the result in boundary format");

  auto* check = app.add_subcommand("check", "Type-check a program and print its result type");
  addFile(check, s);
  addInputs(check, s);

  auto* opt = app.add_subcommand("opt", "Print the optimized program");
  addFile(opt, s);
  addInputs(opt, s);
  addOptimizer(opt, s);

  auto* fmt = app.add_subcommand("fmt", "Print a program in canonical form");
  addFile(fmt, s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmdRun(s);
    if (check->parsed()) return cmdCheck(s);
    if (opt->parsed()) return cmdOpt(s);
    return cmdFmt(s);
  } catch (const UsageError& e) {
    std::cerr << "weldmill: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    nlohmann::json j = errorJson(e);
    j["file"] = s.file;
    std::cerr << j.dump() << "\n";
    return 1;
  }
}
