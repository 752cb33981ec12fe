#include "tomigo/server.hpp"

#include <httplib.h>

namespace tomigo {

using nlohmann::json;

int http_status_for(Errc code) {
    switch (code) {
        case Errc::NotFound:
        case Errc::MissingNode:
            return 404;
        case Errc::ConcurrentMutation:
            return 409;
        case Errc::ContentRejected:
            return 422;
        case Errc::ProviderError:
        case Errc::MalformedOutput:
        case Errc::NoPayloadFound:
        case Errc::ShapeMismatch:
        case Errc::SynthesisFailed:
        case Errc::EmptyGraph:
        case Errc::MockExhausted:
            return 502;
        case Errc::InvalidBrief:
        case Errc::ParseError:
        case Errc::IntegrityError:
        case Errc::PreconditionFailed:
        case Errc::InvalidRequest:
        case Errc::InvalidRole:
        case Errc::DuplicateTypeKey:
        case Errc::EmptyConcept:
            return 400;
        case Errc::FixtureLoadError:
        case Errc::ConfigError:
        case Errc::StorageError:
            return 500;
    }
    return 500;
}

json problem_details(int status, std::string_view code, std::string_view detail) {
    return {{"status", status}, {"code", code}, {"detail", detail}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded()) throw Error(Errc::ParseError, "request body is not valid JSON");
    if (!doc.is_object()) throw Error(Errc::ParseError, "request body must be a JSON object");
    return doc;
}

std::string require_string(const json& body, const char* field) {
    auto it = body.find(field);
    if (it == body.end() || !it->is_string()) {
        throw Error(Errc::InvalidRequest, std::string("field '") + field + "' must be a string");
    }
    return it->get<std::string>();
}

// Wraps a handler so engine errors become problem-details responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            int status = http_status_for(e.code());
            send_json(res, status, problem_details(status, errc_name(e.code()), e.detail()));
        } catch (const json::exception& e) {
            send_json(res, 400, problem_details(400, errc_name(Errc::InvalidRequest), e.what()));
        } catch (const std::exception& e) {
            send_json(res, 500, problem_details(500, "InternalError", e.what()));
        }
    };
}

json gaps_to_json(const std::vector<NodeGap>& gaps) {
    json out = json::array();
    for (const auto& g : gaps) out.push_back({{"node", g.node_id}, {"gap", g.gap}, {"instruction", g.instruction}});
    return out;
}

}  // namespace

Server::Server(Service& service) : service_(service), http_(std::make_unique<httplib::Server>()) { install_routes(); }

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Server::bind_to_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::wait_until_ready() const { http_->wait_until_ready(); }

void Server::stop() {
    if (http_) http_->stop();
}

void Server::install_routes() {
    auto& s = *http_;
    Service& svc = service_;

    s.Post("/projects", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req);
        DesignBrief brief{body.value("design_type", std::string{}), require_string(body, "brief")};
        send_json(res, 201, {{"id", svc.create_project(brief)}});
    }));

    s.Post(R"(/projects/([^/]+)/images)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        std::string bytes;
        std::string media_type;
        if (req.is_multipart_form_data()) {
            if (req.has_file("image")) {
                const auto& file = req.get_file_value("image");
                bytes = file.content;
                media_type = file.content_type;
            } else if (req.files.size() == 1) {
                bytes = req.files.begin()->second.content;
                media_type = req.files.begin()->second.content_type;
            } else {
                throw Error(Errc::InvalidRequest, "multipart body must carry one 'image' part");
            }
        } else {
            bytes = req.body;
            media_type = req.get_header_value("Content-Type");
        }
        if (media_type.rfind("image/", 0) != 0) media_type.clear();
        send_json(res, 201, {{"index", svc.add_image(req.matches[1], std::move(bytes), media_type)}});
    }));

    s.Post(R"(/projects/([^/]+)/synthesize)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        SynthesisResult r = svc.synthesize(req.matches[1]);
        send_json(res, 200, {{"graph", graph_to_json(r.graph)}, {"constraint_report", constraint_report_to_json(r.report)}});
    }));

    s.Get(R"(/projects/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, project_to_json(*svc.snapshot(req.matches[1])));
    }));

    s.Get(R"(/projects/([^/]+)/graph)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, graph_to_json(svc.snapshot(req.matches[1])->graph()));
    }));

    s.Post(R"(/projects/([^/]+)/graph/patch)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        GraphPatch patch = patch_from_json(parse_body(req));
        PatchOutcome r = svc.patch_graph(req.matches[1], std::move(patch));
        send_json(res, 200, {{"graph", graph_to_json(r.graph)}, {"conflicts", conflicts_to_json(r.conflicts)}});
    }));

    s.Post(R"(/projects/([^/]+)/messages)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        std::string text = require_string(parse_body(req), "text");
        MessageOutcome r = svc.handle_user_message(req.matches[1], text);
        send_json(res, 200,
                  {{"patch", patch_to_json(r.patch)},
                   {"conflicts", conflicts_to_json(r.conflicts)},
                   {"summary", r.summary},
                   {"changed_node_ids", r.changed_node_ids}});
    }));

    s.Get(R"(/projects/([^/]+)/questions/next)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        Question q = svc.next_question(req.matches[1]);
        send_json(res, 200, {{"text", q.text}, {"target_types", q.target_type_keys}});
    }));

    s.Post(R"(/projects/([^/]+)/designs/generate)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        bool baseline = req.has_param("baseline") && req.get_param_value("baseline") != "false";
        send_json(res, 201, {{"design_id", svc.generate(req.matches[1], baseline)}});
    }));

    s.Post(R"(/projects/([^/]+)/designs/([^/]+)/update)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        UpdateOutcome r = svc.update_design(req.matches[1], req.matches[2]);
        send_json(res, r.aligned ? 200 : 201,
                  {{"design_id", r.design_id}, {"aligned", r.aligned}, {"gaps", gaps_to_json(r.gaps)}});
    }));

    s.Post(R"(/projects/([^/]+)/designs/([^/]+)/apply-node/([^/]+))",
           guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 201, {{"design_id", svc.apply_node(req.matches[1], req.matches[2], req.matches[3])}});
           }));

    s.Get(R"(/projects/([^/]+)/designs/([^/]+)/image)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
        Image img = svc.design_image(req.matches[1], req.matches[2]);
        res.status = 200;
        res.set_content(img.bytes, img.media_type.empty() ? "application/octet-stream" : img.media_type);
    }));
}

}  // namespace tomigo
