#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "formlab/characteristics.hpp"
#include "formlab/script.hpp"

namespace {

int run_text(const std::string& text, bool json_mode,
             const std::string& out_path) {
  try {
    formlab::Script script = formlab::parse_script(text);
    formlab::OutputMode mode =
        json_mode ? formlab::OutputMode::Json : formlab::OutputMode::Text;
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "cannot open output file: " << out_path << "\n";
        return 2;
      }
      return formlab::run_script(script, mode, out);
    }
    return formlab::run_script(script, mode, std::cout);
  } catch (const formlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formlab: symbolic exterior-calculus engine"};
  app.require_subcommand(1);

  // formlab run <script.fl> [--json] [--out path] | --eval "..."
  auto* run = app.add_subcommand("run", "execute a script file");
  std::string script_path, eval_text, out_path;
  bool json_mode = false;
  run->add_option("script", script_path, "script file (.fl)");
  run->add_option("--eval", eval_text, "inline script text");
  run->add_flag("--json", json_mode, "emit one JSON object per command");
  run->add_option("--out", out_path, "write the report to a file");

  // formlab corpus run <case>
  auto* corpus = app.add_subcommand("corpus", "run the built-in case suite");
  auto* corpus_run = corpus->add_subcommand("run", "run cases");
  std::string which = "all";
  bool corpus_json = false;
  corpus_run->add_option("case", which, "thermo|gas|em|all");
  corpus_run->add_flag("--json", corpus_json, "emit JSON");

  // formlab char --pde file --init csv --h float --s-end float
  auto* chr = app.add_subcommand("char", "integrate PDE characteristics");
  chr->set_help_flag("--help", "print help");  // frees -h/--h for the step size
  std::string pde_path, init_csv, csv_out;
  double h = 1e-3, s_end = 1.0;
  chr->add_option("--pde", pde_path, "file with one pde declaration")
      ->required();
  chr->add_option("--init", init_csv, "comma-separated x..,p..[,u]")
      ->required();
  chr->add_option("--h", h, "step size");
  chr->add_option("--s-end", s_end, "parameter end value");
  chr->add_option("--csv", csv_out, "trajectory dump path");
  bool char_json = false;
  chr->add_flag("--json", char_json, "emit JSON");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    std::string text = eval_text;
    if (text.empty()) {
      if (script_path.empty()) {
        std::cerr << "run needs a script file or --eval\n";
        return 2;
      }
      std::ifstream in(script_path);
      if (!in) {
        std::cerr << "cannot open script: " << script_path << "\n";
        return 2;
      }
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    return run_text(text, json_mode, out_path);
  }

  if (corpus->parsed()) {
    std::string script = "corpus run " + which + "\n";
    return run_text(script, corpus_json, "");
  }

  if (chr->parsed()) {
    std::ifstream in(pde_path);
    if (!in) {
      std::cerr << "cannot open pde file: " << pde_path << "\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::ostringstream script;
    script << ss.str();
    if (!ss.str().empty() && ss.str().back() != '\n') script << "\n";
    // The pde file must declare exactly one pde named in its first word
    // after "pde"; recover the name for the char command.
    std::istringstream lines(ss.str());
    std::string line, pde_name;
    while (std::getline(lines, line)) {
      std::istringstream ws(line);
      std::string w;
      ws >> w;
      if (w == "pde") {
        ws >> pde_name;
        break;
      }
    }
    if (pde_name.empty()) {
      std::cerr << "no pde declaration found in " << pde_path << "\n";
      return 2;
    }
    script << "char " << pde_name << " init (" << init_csv << ") h " << h
           << " send " << s_end;
    if (!csv_out.empty()) script << " csv " << csv_out;
    script << "\n";
    return run_text(script.str(), char_json, "");
  }
  return 2;
}
