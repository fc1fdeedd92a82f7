// pnet: command-line front end for promise-graph models.
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "pnet/pnet.hpp"

namespace {

enum Exit { ok = 0, verdict_false = 1, usage = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool use_color() {
  if (const char* v = std::getenv("PNET_COLOR")) return std::string(v) == "1";
  return isatty(STDERR_FILENO) != 0;
}

void print_diagnostics(const std::vector<pnet::dsl::Diagnostic>& ds, const std::string& source) {
  bool color = use_color();
  for (const auto& d : ds) {
    bool err = d.severity == pnet::dsl::Diagnostic::Severity::error;
    if (color) std::cerr << (err ? "\033[31m" : "\033[33m");
    std::cerr << d.to_text(source);
    if (color) std::cerr << "\033[0m";
    std::cerr << '\n';
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

pnet::dsl::Elaboration load(const std::string& path) {
  auto e = pnet::dsl::load_model(read_file(path), path);
  print_diagnostics(e.diagnostics, path);
  if (!e.graph) throw UsageError(path + ": model has errors");
  return e;
}

nlohmann::json to_json(const pnet::AnalysisReport& r) {
  nlohmann::json j;
  j["verdict"] = r.verdict;
  j["witnesses"] = nlohmann::json::array();
  for (const auto& w : r.witnesses)
    j["witnesses"].push_back({{"category", w.category}, {"subject", w.subject}, {"detail", w.detail}});
  j["narrative"] = r.narrative;
  return j;
}

int report(const pnet::AnalysisReport& r, bool json) {
  if (json) std::cout << to_json(r).dump(2) << '\n';
  else std::cout << r.to_text();
  return r.verdict ? ok : verdict_false;
}

int summarize(const pnet::PromiseGraph& g, bool json) {
  auto bindings = pnet::find_bindings(g);
  auto unmatched = pnet::unmatched_impositions(g);
  auto clashes = pnet::uniqueness_violations(g);
  auto roles = pnet::infer_roles(g);
  if (json) {
    nlohmann::json j{{"agents", g.agents().size()},       {"promises", g.promises().size()},
                     {"impositions", g.impositions().size()}, {"containers", g.containers().size()},
                     {"bindings", bindings.size()},        {"unmatched_impositions", unmatched.size()},
                     {"uniqueness_violations", clashes.size()}, {"roles", roles.size()}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "agents: " << g.agents().size() << "\npromises: " << g.promises().size()
              << "\nimpositions: " << g.impositions().size() << "\ncontainers: " << g.containers().size()
              << "\nbindings: " << bindings.size() << "\nroles: " << roles.size() << '\n';
    for (auto i : unmatched) {
      const auto& imp = g.impositions()[i];
      std::cout << "unmatched imposition: " << imp.imposer << " -> " << imp.imposee << ' ' << imp.body.canonical()
                << '\n';
    }
    for (auto i : clashes) {
      const auto& p = g.promises()[i];
      std::cout << "uniqueness violation: " << p.promiser << ' ' << p.body.canonical() << '\n';
    }
  }
  return clashes.empty() ? ok : verdict_false;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model, simulate and verify promise graphs of data networks", "pnet"};
  app.require_subcommand(1);
  std::string model, src, dst, from, out, container, desired, service;
  unsigned ttl = pnet::kDefaultTtl;
  unsigned bits = 0, prefix = 0;
  bool json = false;

  auto* check = app.add_subcommand("check", "Validate a model, or check cooperation between two agents");
  check->add_option("MODEL", model)->required();
  auto* check_src = check->add_option("--src", src, "Source agent");
  check->add_option("--dst", dst, "Destination agent")->needs(check_src);
  check_src->needs(check->get_option("--dst"));
  check->add_option("--service", service, "Check a service chain of this kind instead of delivery");
  check->add_flag("--json", json, "Structured output");

  auto* simulate = app.add_subcommand("simulate", "Inject a message and print the delivery trace");
  simulate->add_option("MODEL", model)->required();
  simulate->add_option("--from", from, "Injecting agent")->required();
  simulate->add_option("--dst", dst, "Destination address, e.g. mac:00:00:11:11:11:BB")->required();
  simulate->add_option("--ttl", ttl, "Hop budget")->check(CLI::Range(1u, 4096u));

  auto* flood = app.add_subcommand("flood", "Print the broadcast domain of an agent");
  flood->add_option("MODEL", model)->required();
  flood->add_option("--from", from, "Source agent")->required();

  auto* compile = app.add_subcommand("compile", "Compile a policy file into a model file");
  compile->add_option("POLICY", model)->required();
  compile->add_option("-o,--output", out, "Output model file")->required();
  compile->add_flag("--json", json, "Structured verification output");

  auto* align = app.add_subcommand("align", "Compare a container's membrane with a desired body set");
  align->add_option("MODEL", model)->required();
  align->add_option("--container", container)->required();
  align->add_option("--desired", desired, "File of desired bodies")->required();
  align->add_flag("--json", json, "Structured output");

  auto* spof = app.add_subcommand("spof", "List agents whose failure breaks delivery");
  spof->add_option("MODEL", model)->required();
  spof->add_option("--src", src)->required();
  spof->add_option("--dst", dst)->required();

  auto* scale = app.add_subcommand("scale", "Split an address space into containers and members");
  scale->add_option("--bits", bits)->required()->check(CLI::Range(0u, 4096u));
  scale->add_option("--prefix", prefix)->required();

  auto* dot = app.add_subcommand("dot", "Export a model as a Graphviz digraph");
  dot->add_option("MODEL", model)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return usage;
  }

  try {
    if (*check) {
      auto e = load(model);
      if (src.empty()) return summarize(*e.graph, json);
      std::optional<std::string> kind;
      if (!service.empty()) kind = service;
      return report(pnet::check_cooperation(*e.graph, src, dst, kind), json);
    }
    if (*simulate) {
      auto e = load(model);
      auto addr = pnet::MultipletAddress::parse(dst);
      auto trace = pnet::inject(*e.graph, from, pnet::Message{addr, {}, ttl});
      std::cout << trace.to_text();
      return trace.accepted() ? ok : verdict_false;
    }
    if (*flood) {
      auto e = load(model);
      for (const auto& a : pnet::flood_set(*e.graph, from)) std::cout << a << '\n';
      return ok;
    }
    if (*compile) {
      auto e = load(model);
      if (!e.policy) throw UsageError(model + ": no cell declarations");
      std::ofstream o(out, std::ios::binary);
      if (!o) throw UsageError("cannot write '" + out + "'");
      o << pnet::dsl::render_graph(*e.graph);
      return report(pnet::verify_compiled(*e.policy, *e.graph), json);
    }
    if (*align) {
      auto e = load(model);
      pnet::BodySet want;
      std::istringstream in(read_file(desired));
      for (std::string line; std::getline(in, line);) {
        line = line.substr(0, line.find('#'));
        std::istringstream words(line);
        for (std::string w; words >> w;) want.insert(pnet::Body::parse(w));
      }
      return report(pnet::check_alignment(want, *e.graph, container), json);
    }
    if (*spof) {
      auto e = load(model);
      if (!pnet::reachable(*e.graph, src, dst)) {
        std::cout << dst << " is not reachable from " << src << '\n';
        return verdict_false;
      }
      for (const auto& a : pnet::single_points_of_failure(*e.graph, src, dst)) std::cout << a << '\n';
      return ok;
    }
    if (*scale) {
      auto s = pnet::scaling_split({bits, prefix});
      std::cout << "containers: " << s.containers << "\nper_container: " << s.per_container << '\n';
      return ok;
    }
    if (*dot) {
      auto e = load(model);
      std::cout << pnet::export_dot(*e.graph);
      return ok;
    }
  } catch (const UsageError& e) {
    std::cerr << "pnet: " << e.what() << '\n';
    return usage;
  } catch (const pnet::ModelError& e) {
    std::cerr << "pnet: " << e.what() << '\n';
    return usage;
  }
  return usage;
}
