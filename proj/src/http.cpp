#include "illumine/http.hpp"

#include "illumine/error.hpp"

#include <httplib.h>

namespace illumine {

using nlohmann::json;

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
    send(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

json query(const httplib::Request& req) {
    json q = json::object();
    for (const auto& [k, v] : req.params) q[k] = v;
    return q;
}

json body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json b = json::parse(req.body);
    if (!b.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
    return b;
}

std::uint64_t id_param(const httplib::Request& req, const char* name) {
    const std::string& s = req.path_params.at(name);
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw Error(ErrorCode::InvalidArgument, "bad id '" + s + "'");
    return v;
}

template <class Fn>
httplib::Server::Handler handle(Fn fn, int ok = 200) {
    return [fn, ok](const httplib::Request& req, httplib::Response& res) {
        try {
            send(res, ok, fn(req));
        } catch (const DuplicateLabelError& e) {
            res.status = 409;
            res.set_content(json{{"error", {{"code", "DuplicateLabel"}, {"message", e.what()}, {"existing_id", e.existing_id()}}}}.dump(),
                            "application/json");
        } catch (const Error& e) {
            send_error(res, http_status(e.code()), to_string(e.code()), e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, "ParseError", e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, "Internal", e.what());
        }
    };
}

}  // namespace

void mount_routes(httplib::Server& s, Engine& e, const std::optional<std::string>& static_dir) {
    using R = const httplib::Request&;
    s.Get("/corpus/summary", handle([&](R) { return e.corpus_summary(); }));
    s.Get("/graph", handle([&](R req) { return e.graph(query(req)); }));
    s.Post("/graph/selection-summary", handle([&](R req) { return e.selection_summary(body(req)); }));

    s.Post("/projections", handle([&](R req) { return e.create_projection(body(req)); }, 202));
    s.Get("/projections/:id", handle([&](R req) { return e.projection(id_param(req, "id")); }));
    s.Get("/snapshots", handle([&](R req) { return e.snapshots(query(req)); }));
    s.Get("/snapshots/:id", handle([&](R req) { return e.snapshot(id_param(req, "id")); }));
    s.Post("/sessions", handle([&](R req) { return e.save_session(body(req)); }));

    s.Post("/annotations", handle([&](R req) { return e.set_label(body(req)); }));
    s.Post("/labels", handle([&](R req) { return e.create_label(body(req)); }));
    s.Post("/labels/:id/category", handle([&](R req) { return e.categorize(req.path_params.at("id"), body(req)); }));
    s.Get("/labels/:id/frequency", handle([&](R req) { return e.label_frequency(req.path_params.at("id")); }));

    s.Post("/recs/word-space", handle([&](R req) { return e.word_space_recs(body(req)); }));
    s.Post("/recs/cooccurrence", handle([&](R req) { return e.cooccurrence_recs(body(req)); }));
    s.Post("/recs/image-neighbors", handle([&](R req) { return e.image_neighbor_recs(body(req)); }));

    s.Get("/hierarchy", handle([&](R) { return e.hierarchy(); }));
    s.Post("/hierarchy/nodes", handle([&](R req) { return e.add_node(body(req)); }));
    s.Post("/hierarchy/edges", handle([&](R req) { return e.add_edge(body(req)); }));
    s.Delete("/hierarchy/edges", handle([&](R req) {
        json b = body(req);
        for (const auto& [k, v] : req.params)
            if (!b.contains(k)) b[k] = v;
        return e.remove_edge(b);
    }));
    s.Get("/hierarchy/layout", handle([&](R req) { return e.layout(query(req)); }));

    s.Get("/history", handle([&](R req) {
        std::uint64_t since = 0;
        if (req.has_param("since_seq")) {
            const std::string v = req.get_param_value("since_seq");
            std::size_t used = 0;
            try {
                since = std::stoull(v, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != v.size()) throw Error(ErrorCode::InvalidArgument, "bad since_seq '" + v + "'");
        }
        return e.history(since);
    }));
    s.Get("/jobs", handle([&](R) { return e.jobs_list(); }));
    s.Get("/jobs/:id", handle([&](R req) { return e.job(id_param(req, "id")); }));

    if (static_dir) s.set_mount_point("/", *static_dir);
}

}  // namespace illumine
