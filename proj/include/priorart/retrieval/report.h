#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "priorart/retrieval/query.h"
#include "priorart/retrieval/search.h"

namespace priorart::retrieval {

// Line-oriented, tab-separated report files shared by the CLI stages.
//
//   priorart-results 1            priorart-ranking 1
//   patent <id>                   patent <id>
//   query <json>                  query <json>
//   doc <id>                      result <rank> <id> <count> <weighted> <final> <source>
//   ...                           match <phrase> <cosine>
//                                 ...
// Reals are written with 17 significant digits so they read back exactly.

struct RetrievalReport {
  std::string patent_id;
  StructuredQuery query;
  std::vector<std::string> doc_ids;
};

struct RankingReport {
  std::string patent_id;
  StructuredQuery query;
  std::vector<RankedResult> results;
};

void write_report(const RetrievalReport& report, std::ostream& out);
void write_report(const RankingReport& report, std::ostream& out);

// Throw DataError naming the line on malformed input.
RetrievalReport read_retrieval_report(std::istream& in);
RankingReport read_ranking_report(std::istream& in);
RetrievalReport read_retrieval_report(const std::filesystem::path& path);
RankingReport read_ranking_report(const std::filesystem::path& path);

}  // namespace priorart::retrieval
