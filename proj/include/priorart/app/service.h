#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "priorart/app/pipeline.h"

namespace priorart::app {

// HTTP front end over a Pipeline. Sessions live in directories under
// `sessions_root` and survive restarts; nothing else is kept between runs.
//
//   GET  /sessions
//   POST /sessions                             {"patent_id": ...}
//   GET  /sessions/{id}                        state: completed stages, history size
//   POST /sessions/{id}/stages/{stage}/run     optional {"k": n} for the query stage
//   GET  /sessions/{id}/artifacts/{stage}
//   PUT  /sessions/{id}/query                  {"phrases": [...], "sections": [...], "match_mode": ...}
//   GET  /sessions/{id}/report
//   GET  /sessions/{id}/history/{n}/{stage}    artifacts replaced by the n-th query edit
//   GET  /sessions/{id}/audit
//   GET  /sessions/{id}/annotations
//   PUT  /sessions/{id}/annotations/{doc_id}   {"label": "relevant" | "not_relevant" | "unsure" | null}
//   GET  /corpus/docs/{doc_id}
//   GET  /healthz
//
// Errors come back as {"error": message} with 400 (bad request), 404
// (unknown session, stage or document), 409 (stage order or an artifact
// that does not exist yet) or 422 (the stage ran and failed).
class Service {
 public:
  Service(const Pipeline& pipeline, std::filesystem::path sessions_root);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws Error when the
  // address cannot be bound (port busy).
  int bind(const std::string& host, int port);
  // Serves until stop() is called. bind() must come first.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace priorart::app
