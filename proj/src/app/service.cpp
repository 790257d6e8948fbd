#include "priorart/app/service.h"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>

#include "priorart/app/session.h"
#include "priorart/retrieval/report.h"

namespace priorart::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class NotFound : public Error {
 public:
  using Error::Error;
};

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json document_json(const corpus::PatentDocument& d) {
  std::vector<std::string> codes;
  for (const auto& c : d.ipc_codes) codes.push_back(c.str());
  return {{"id", d.id},
          {"title", d.title},
          {"abstract", d.abstract},
          {"claims", d.claims},
          {"independent_claims", d.independent_claims},
          {"ipc_codes", codes},
          {"cited_by_examiner", d.cited_by_examiner}};
}

json session_json(const Session& s) {
  json stages = json::array();
  for (auto st : s.completed()) stages.push_back(std::string(to_string(st)));
  return {{"id", s.id()}, {"patent_id", s.patent_id()}, {"stages", stages}, {"history", s.history_size()}};
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw DataError("request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw DataError(std::string("request body is not JSON: ") + e.what());
  }
}

Stage stage_param(const std::string& name) {
  const auto s = parse_stage(name);
  if (!s) throw NotFound("unknown stage '" + name + "'");
  return *s;
}

// Report files go out as JSON; the other artifacts already are.
void reply_artifact(httplib::Response& res, Stage stage, const std::string& bytes) {
  std::istringstream in(bytes);
  if (stage == Stage::retrieve) {
    reply(res, 200, to_json(retrieval::read_retrieval_report(in)));
  } else if (stage == Stage::rank) {
    reply(res, 200, to_json(retrieval::read_ranking_report(in)));
  } else {
    res.status = 200;
    res.set_content(bytes, "application/json");
  }
}

}  // namespace

struct Service::Impl {
  const Pipeline& pipeline;
  const Runner runner;
  fs::path root;
  httplib::Server server;

  std::mutex registry_mutex;
  std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::size_t next_id = 1;

  Impl(const Pipeline& p, fs::path r) : pipeline(p), runner(p), root(std::move(r)) {
    fs::create_directories(root);
    // Continue numbering after sessions left by an earlier process.
    for (const auto& entry : fs::directory_iterator(root)) {
      const auto name = entry.path().filename().string();
      if (name.size() == 7 && name[0] == 's' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
        next_id = std::max(next_id, std::stoul(name.substr(1)) + 1);
      }
    }
    routes();
  }

  std::mutex& lock_for(const std::string& id) {
    std::lock_guard<std::mutex> g(registry_mutex);
    auto& m = locks[id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  Session open(const std::string& id) {
    const auto dir = root / id;
    if (!fs::exists(dir / "session.json")) throw NotFound("unknown session '" + id + "'");
    return Session::open(dir);
  }

  // Runs `body` and turns engine exceptions into status codes.
  template <typename F>
  void handle(httplib::Response& res, F&& body) {
    try {
      body();
    } catch (const NotFound& e) {
      reply(res, 404, {{"error", e.what()}});
    } catch (const ConflictError& e) {
      reply(res, 409, {{"error", e.what()}});
    } catch (const StageError& e) {
      reply(res, 422, {{"error", e.what()}, {"stage", e.stage()}});
    } catch (const Error& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const std::invalid_argument& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  }

  void routes() {
    // Without SO_REUSEPORT, a second server on a busy port fails to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}, {"documents", pipeline.corpus().size()}});
    });

    server.Get(R"(/corpus/docs/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto* doc = pipeline.corpus().find(req.matches[1].str());
        if (!doc) throw NotFound("unknown document '" + req.matches[1].str() + "'");
        reply(res, 200, document_json(*doc));
      });
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto body = parse_body(req);
        if (!body.contains("patent_id") || !body["patent_id"].is_string()) {
          throw DataError("body needs a string field 'patent_id'");
        }
        const auto patent = body["patent_id"].get<std::string>();
        if (!pipeline.corpus().find(patent)) throw NotFound("unknown patent '" + patent + "'");
        std::string id;
        {
          std::lock_guard<std::mutex> g(registry_mutex);
          id = fmt::format("s{:06d}", next_id++);
        }
        std::lock_guard<std::mutex> g(lock_for(id));
        const auto session = Session::create(root / id, id, patent, pipeline.config());
        reply(res, 201, session_json(session));
      });
    });

    server.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&] {
        std::vector<fs::path> dirs;
        for (const auto& entry : fs::directory_iterator(root)) {
          if (fs::exists(entry.path() / "session.json")) dirs.push_back(entry.path());
        }
        std::sort(dirs.begin(), dirs.end());
        json out = json::array();
        for (const auto& d : dirs) out.push_back(session_json(Session::open(d)));
        reply(res, 200, out);
      });
    });

    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.matches[1].str();
        std::lock_guard<std::mutex> g(lock_for(id));
        reply(res, 200, session_json(open(id)));
      });
    });

    server.Get(R"(/sessions/([^/]+)/audit)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.matches[1].str();
        std::lock_guard<std::mutex> g(lock_for(id));
        reply(res, 200, open(id).audit());
      });
    });

    server.Get(R"(/sessions/([^/]+)/annotations)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.matches[1].str();
        std::lock_guard<std::mutex> g(lock_for(id));
        reply(res, 200, open(id).annotations());
      });
    });

    // {"label": "relevant" | "not_relevant" | "unsure" | null}; null clears.
    server.Put(R"(/sessions/([^/]+)/annotations/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.matches[1].str();
        const auto doc = req.matches[2].str();
        const auto body = parse_body(req);
        if (!body.contains("label") || !(body["label"].is_string() || body["label"].is_null())) {
          throw DataError("body needs a field 'label' (string or null)");
        }
        if (!pipeline.corpus().find(doc)) throw NotFound("unknown document '" + doc + "'");
        std::lock_guard<std::mutex> g(lock_for(id));
        const auto session = open(id);
        session.annotate(doc, body["label"].is_null() ? std::string() : body["label"].get<std::string>());
        reply(res, 200, session.annotations());
      });
    });

    server.Post(R"(/sessions/([^/]+)/stages/([^/]+)/run)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  handle(res, [&] {
                    const auto id = req.matches[1].str();
                    const auto stage = stage_param(req.matches[2].str());
                    const auto body = parse_body(req);
                    std::optional<std::size_t> k;
                    if (body.contains("k")) {
                      if (!body["k"].is_number_unsigned()) throw DataError("'k' must be a positive integer");
                      k = body["k"].get<std::size_t>();
                    }
                    std::lock_guard<std::mutex> g(lock_for(id));
                    const auto session = open(id);
                    runner.run(session, stage, k);
                    reply(res, 200, session_json(session));
                  });
                });

    server.Get(R"(/sessions/([^/]+)/artifacts/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.matches[1].str();
        const auto stage = stage_param(req.matches[2].str());
        std::lock_guard<std::mutex> g(lock_for(id));
        const auto session = open(id);
        reply_artifact(res, stage, session.read(stage));
      });
    });

    server.Get(R"(/sessions/([^/]+)/history/([0-9]+)/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 handle(res, [&] {
                   const auto id = req.matches[1].str();
                   const auto n = std::stoul(req.matches[2].str());
                   const auto stage = stage_param(req.matches[3].str());
                   std::lock_guard<std::mutex> g(lock_for(id));
                   const auto session = open(id);
                   if (n == 0 || n > session.history_size()) {
                     throw NotFound(fmt::format("session {} has no history entry {}", id, n));
                   }
                   reply_artifact(res, stage, session.read_history(n, stage));
                 });
               });

    server.Put(R"(/sessions/([^/]+)/query)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.matches[1].str();
        auto body = parse_body(req);
        body["provenance"] = "human_edited";
        const auto query = retrieval::query_from_json(body);
        std::lock_guard<std::mutex> g(lock_for(id));
        const auto session = open(id);
        runner.edit_query(session, query);
        auto state = session_json(session);
        state["query"] = json::parse(session.read(Stage::query));
        state["audit"] = session.audit().back();
        reply(res, 200, state);
      });
    });

    server.Get(R"(/sessions/([^/]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto id = req.matches[1].str();
        std::lock_guard<std::mutex> g(lock_for(id));
        const auto session = open(id);
        res.status = 200;
        res.set_content(session.read(Stage::report), "application/json");
      });
    });
  }
};

Service::Service(const Pipeline& pipeline, fs::path sessions_root)
    : impl_(std::make_unique<Impl>(pipeline, std::move(sessions_root))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error(fmt::format("cannot bind {}:{} (port busy?)", host, port));
  return port;
}

void Service::listen() {
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace priorart::app
