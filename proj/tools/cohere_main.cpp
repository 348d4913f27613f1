// Command line front end: check, run, trace, infer, translate.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cohere/cohere.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitDiagnostics = 1;
constexpr int kExitUsage = 2;
constexpr int kExitStuck = 3;
constexpr int kExitFuel = 4;

struct Options {
  std::string file;
  bool raw = false;
  bool emit_json = false;
  bool no_overlap = false;
  bool trace = false;
  int fuel = 10000;
  std::string schedule;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json store_record(const cohere::VarKey& key, cohere::ValidityPair p) {
  auto letter = [](cohere::Validity v) {
    return v == cohere::Validity::Valid ? "V" : "I";
  };
  return json{{"key", cohere::to_string(key)},
              {"local", letter(p.local)},
              {"remote", letter(p.remote)}};
}

void print_store(const cohere::Store& store, bool emit_json, std::ostream& out) {
  for (const auto& [key, pair] : store) {
    if (emit_json)
      out << store_record(key, pair).dump() << "\n";
    else
      out << cohere::to_string(key) << " " << cohere::to_string(pair) << "\n";
  }
}

// Diagnostics in text or one JSON object per line; exit reflects errors only.
int cmd_check(const Options& opt) {
  const std::string src = slurp(opt.file);
  std::vector<cohere::Diagnostic> diags;
  std::vector<cohere::Note> notes;
  if (opt.raw) {
    cohere::RawProgram p = cohere::parse_raw(src);
    cohere::DeclBlock pseudo({}, p.body);
    diags = cohere::check_localised(pseudo);
  } else {
    cohere::AnnotatedProgram p = cohere::parse_program(src);
    cohere::OverlapRegistry registry =
        opt.no_overlap ? cohere::OverlapRegistry() : cohere::build_registry(p.decls);
    diags = cohere::check_program(p, registry);
    notes = cohere::check_notes(p);
  }
  for (const auto& d : diags) {
    if (opt.emit_json) {
      json rec{{"rule", d.rule},
               {"view", d.view},
               {"line", d.pos.line},
               {"col", d.pos.col},
               {"message", d.message}};
      std::cout << rec.dump() << "\n";
    } else {
      std::cout << d.pos.line << ":" << d.pos.col << ": " << d.rule << " [" << d.view
                << "] " << d.message << "\n";
    }
  }
  if (!opt.emit_json)
    for (const auto& n : notes)
      std::cout << "note: " << n.pos.line << ":" << n.pos.col << ": " << n.rule << " ["
                << n.view << "] " << n.message << "\n";
  return diags.empty() ? kExitOk : kExitDiagnostics;
}

int report_run(const cohere::RunResult& r, const Options& opt) {
  if (opt.trace) {
    int idx = 0;
    for (const auto& step : r.trace) {
      ++idx;
      if (opt.emit_json) {
        json deltas = json::array();
        for (const auto& [key, pair] : step.delta)
          deltas.push_back(store_record(key, pair));
        json rec{{"step", idx},
                 {"rule", cohere::name_of(step.rule)},
                 {"head", cohere::to_string(step.head)},
                 {"delta", deltas}};
        std::cout << rec.dump() << "\n";
      } else {
        std::ostringstream line;
        line << idx << " " << cohere::name_of(step.rule);
        for (size_t pad = line.str().size(); pad < 16; ++pad) line << " ";
        line << cohere::to_string(step.head);
        std::string sep = " => ";
        for (const auto& [key, pair] : step.delta) {
          line << sep << cohere::to_string(key) << "=" << cohere::to_string(pair);
          sep = " ";
        }
        std::cout << line.str() << "\n";
      }
    }
  }

  if (opt.emit_json) {
    json rec{{"outcome", cohere::name_of(r.status)},
             {"steps", r.steps},
             {"schedule_consumed", r.schedule_consumed}};
    if (r.stuck) {
      rec["stuck"] = {{"key", cohere::to_string(r.stuck->key)},
                      {"effect", cohere::name_of(r.stuck->effect)},
                      {"site", cohere::name_of(r.stuck->site)},
                      {"have", cohere::to_string(r.stuck->actual)}};
    }
    std::cout << rec.dump() << "\n";
  } else {
    std::cout << "outcome: " << cohere::name_of(r.status) << "\n";
    std::cout << "steps: " << r.steps << "\n";
    if (r.stuck) std::cout << "stuck at: " << r.stuck->describe() << "\n";
  }
  print_store(r.store, opt.emit_json, std::cout);
  if (r.schedule_overflowed && !opt.schedule.empty())
    std::cerr << "note: schedule exhausted; later opaque conditions answered false\n";

  switch (r.status) {
    case cohere::RunStatus::Done: return kExitOk;
    case cohere::RunStatus::Stuck: return kExitStuck;
    case cohere::RunStatus::FuelExhausted: return kExitFuel;
  }
  return kExitOk;
}

// Annotated programs are checked, closed over overlaps, translated, run.
int cmd_run(const Options& opt) {
  const std::string src = slurp(opt.file);
  cohere::Schedule schedule = cohere::Schedule::from_string(opt.schedule);
  auto mode = opt.trace ? cohere::TraceMode::Full : cohere::TraceMode::None;

  if (opt.raw) {
    cohere::RawProgram p = cohere::parse_raw(src);
    return report_run(cohere::run(p, opt.fuel, schedule, mode), opt);
  }

  // Close the modes over overlaps first, then insist the closed program is
  // well declared; opting out of overlap handling drops both halves.
  cohere::AnnotatedProgram p = cohere::parse_program(src);
  cohere::OverlapRegistry registry =
      opt.no_overlap ? cohere::OverlapRegistry() : cohere::build_registry(p.decls);
  if (!opt.no_overlap) p = cohere::rewrite_program(p, registry);
  auto diags = cohere::check_program(p, registry);
  if (!diags.empty()) {
    for (const auto& d : diags)
      std::cerr << d.pos.line << ":" << d.pos.col << ": " << d.rule << " [" << d.view
                << "] " << d.message << "\n";
    return kExitDiagnostics;
  }
  cohere::Stmt translated = cohere::translate_program(p);
  return report_run(
      cohere::run(translated, cohere::initial_store(p.decls), opt.fuel, schedule, mode),
      opt);
}

// Prints the program with overlap-inferred modes merged in.
int cmd_infer(const Options& opt) {
  if (opt.raw) throw std::runtime_error("infer needs an annotated program");
  const std::string src = slurp(opt.file);
  cohere::AnnotatedProgram p = cohere::parse_program(src);
  if (!opt.no_overlap) p = cohere::rewrite_program(p, cohere::build_registry(p.decls));
  if (opt.emit_json) {
    for (size_t i = 0; i < p.blocks.size(); ++i) {
      json modes = json::array();
      for (const auto& m : p.blocks[i].modes) {
        modes.push_back(json{{"kind", cohere::name_of(m.kind, cohere::Site::Local)},
                             {"site", cohere::name_of(m.site)},
                             {"view", m.view},
                             {"shadow", m.shadow}});
      }
      std::cout << json{{"block", i}, {"modes", modes}}.dump() << "\n";
    }
  } else {
    std::cout << cohere::pretty(p);
  }
  return kExitOk;
}

// Prints the core-calculus form of each block on one line.
int cmd_translate(const Options& opt) {
  if (opt.raw) throw std::runtime_error("translate needs an annotated program");
  const std::string src = slurp(opt.file);
  cohere::AnnotatedProgram p = cohere::parse_program(src);
  if (!opt.no_overlap) p = cohere::rewrite_program(p, cohere::build_registry(p.decls));
  for (size_t i = 0; i < p.blocks.size(); ++i) {
    cohere::Stmt core = cohere::translate_block(p.blocks[i], p.decls);
    if (opt.emit_json)
      std::cout << json{{"block", i}, {"core", cohere::to_string(core)}}.dump() << "\n";
    else
      std::cout << "block " << i << ": " << cohere::to_string(core) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"valid-invalid coherence calculus tool"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool run_flags) {
    sub->add_option("file", opt.file, "program file")->required();
    sub->add_flag("--raw", opt.raw, "treat the file as bare core statements");
    sub->add_flag("--json", opt.emit_json, "emit JSON records, one per line");
    sub->add_flag("--no-overlap", opt.no_overlap, "skip overlap inference");
    if (run_flags) {
      sub->add_option("--fuel", opt.fuel, "step budget")->check(CLI::PositiveNumber);
      sub->add_option("--schedule", opt.schedule,
                      "bits answering opaque conditions, e.g. 0101");
    }
  };

  CLI::App* check = app.add_subcommand("check", "report declaration problems");
  add_common(check, false);
  CLI::App* run = app.add_subcommand("run", "execute a program");
  add_common(run, true);
  run->add_flag("--trace", opt.trace, "print each reduction step");
  CLI::App* trace = app.add_subcommand("trace", "execute and print each step");
  add_common(trace, true);
  CLI::App* infer = app.add_subcommand("infer", "print overlap-completed modes");
  add_common(infer, false);
  CLI::App* translate = app.add_subcommand("translate", "print core form of blocks");
  add_common(translate, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(opt);
    if (run->parsed()) return cmd_run(opt);
    if (trace->parsed()) {
      opt.trace = true;
      return cmd_run(opt);
    }
    if (infer->parsed()) return cmd_infer(opt);
    if (translate->parsed()) return cmd_translate(opt);
  } catch (const cohere::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const cohere::OverlapInferenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiagnostics;
  } catch (const cohere::ConstructionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
