// ktbt: run simulations and experiments, and inspect stringBT documents.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "ktbt/experiment.hpp"
#include "ktbt/stringbt.hpp"

namespace {

// A document argument is literal text if it starts with '<', stdin for "-",
// and a file path otherwise.
std::string read_document(const std::string& arg) {
  if (!arg.empty() && arg.front() == '<') return arg;
  if (arg == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(arg, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + arg);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_spec(ktbt::ExperimentSpec spec, const std::string& output) {
  if (!output.empty()) spec.output_dir = output;
  const auto report = ktbt::run_experiment(spec);
  std::cout << report.summary;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge transfer through behavior trees: simulator and stringBT tools"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;

  auto* run = app.add_subcommand("run", "Run the configured scenario once per trial, ignoring any study");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_option("-o,--output", output, "Override output_dir");

  auto* experiment = app.add_subcommand("experiment", "Run the configured study");
  experiment->add_option("config", config_path, "Configuration file")->required();
  experiment->add_option("-o,--output", output, "Override output_dir");

  auto* bt = app.add_subcommand("bt", "stringBT tools");
  bt->require_subcommand(1);
  std::string doc, seq_text, action_doc;

  auto* parse = bt->add_subcommand("parse", "Validate a document and print its outline");
  parse->add_option("document", doc, "Document text, file path, or - for stdin")->required();
  auto* fmt = bt->add_subcommand("fmt", "Print the canonical form of a document");
  fmt->add_option("document", doc, "Document text, file path, or - for stdin")->required();
  auto* merge = bt->add_subcommand("merge", "Merge a knowledge sub-tree into a control document");
  merge->add_option("control", doc, "Control document")->required();
  merge->add_option("conditions", seq_text, "Condition sequence, e.g. <c>(a)<c>(!b)")->required();
  merge->add_option("action", action_doc, "Action document")->required();
  auto* query = bt->add_subcommand("query", "Print the action sub-tree for a condition sequence, or NONE");
  query->add_option("control", doc, "Control document")->required();
  query->add_option("conditions", seq_text, "Condition sequence")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto spec = ktbt::load_config(config_path);
      spec.study = ktbt::Study::None;
      spec.study_values.clear();
      return run_spec(std::move(spec), output);
    }
    if (experiment->parsed()) return run_spec(ktbt::load_config(config_path), output);

    const ktbt::Node tree = ktbt::parse(read_document(doc));
    if (parse->parsed()) {
      std::cout << ktbt::outline(tree);
    } else if (fmt->parsed()) {
      std::cout << ktbt::serialize(tree) << "\n";
    } else if (merge->parsed()) {
      const auto seq = ktbt::parse_conditions(read_document(seq_text));
      const auto action = ktbt::parse(read_document(action_doc));
      std::cout << ktbt::serialize(ktbt::merge_knowledge(tree, seq, action)) << "\n";
    } else if (query->parsed()) {
      const auto seq = ktbt::parse_conditions(read_document(seq_text));
      const auto found = ktbt::find_knowledge(tree, seq);
      std::cout << (found ? ktbt::serialize(*found) : std::string("NONE")) << "\n";
    }
    return 0;
  } catch (const ktbt::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
