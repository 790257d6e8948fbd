// Writes the synthetic evaluation corpus as JSONL, plus a queries.json with
// the query patents and their planted citations.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "priorart/app/config.h"
#include "support/synthetic.h"

int main(int argc, char** argv) {
  CLI::App cli{"synthetic corpus generator"};
  std::string out, queries;
  std::size_t docs = 500;
  std::uint64_t seed = 1;
  cli.add_option("--out", out, "JSONL corpus to write")->required();
  cli.add_option("--queries", queries, "query list to write (JSON)");
  cli.add_option("--docs", docs);
  cli.add_option("--seed", seed);
  CLI11_PARSE(cli, argc, argv);

  using namespace priorart;
  try {
    app::RunConfig config;
    config.corpus = out;
    const auto table = ipc::load_descriptions(app::default_ipc_table());
    const auto corpus = testing::make_synthetic_corpus(config, table, docs, seed);
    testing::write_jsonl(corpus, out);
    if (!queries.empty()) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& q : corpus.queries) {
        j.push_back({{"id", q.id}, {"code", q.code.str()}, {"citations", q.citations}});
      }
      std::ofstream(queries) << j.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
