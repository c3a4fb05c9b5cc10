// Command-line entry point: serve, ingest, fixture, export-hierarchy.

#include "illumine/error.hpp"
#include "illumine/fixture.hpp"
#include "illumine/hierarchy.hpp"
#include "illumine/http.hpp"
#include "illumine/service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw illumine::Error(illumine::ErrorCode::Io, "cannot write " + path.string());
    f << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw illumine::Error(illumine::ErrorCode::Io, "cannot open " + path.string());
    return json::parse(in);
}

std::optional<illumine::StopwordSet> stopwords_from(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return illumine::load_stopwords(path);
}

int ingest(const std::string& manifest, const std::string& data_dir, const std::string& stopwords) {
    const auto stop = stopwords_from(stopwords);
    illumine::LoadReport report;
    const illumine::Corpus corpus = illumine::load_corpus(manifest, &report, stop ? &*stop : nullptr);
    illumine::save_corpus(corpus, data_dir);

    const json source = read_json(manifest);
    if (const auto it = source.find("hierarchy"); it != source.end() && it->is_string()) {
        const fs::path from = fs::path(manifest).parent_path() / it->get<std::string>();
        const auto h = illumine::import_hierarchy(read_json(from));
        write_json(fs::path(data_dir) / "hierarchy.json", illumine::export_hierarchy(h));
        json saved = read_json(fs::path(data_dir) / "manifest.json");
        saved["hierarchy"] = "hierarchy.json";
        write_json(fs::path(data_dir) / "manifest.json", saved);
    }
    json summary = illumine::corpus_summary(corpus);
    summary["merged_labels"] = report.merged_labels;
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int serve(const std::string& data_dir, int port, const std::string& host, const std::string& stopwords,
          int debounce_ms, int workers, const std::string& static_dir) {
    const auto stop = stopwords_from(stopwords);
    illumine::EngineOptions opts;
    opts.debounce = std::chrono::milliseconds(debounce_ms);
    opts.workers = static_cast<std::size_t>(workers);
    auto engine = illumine::Engine::open(data_dir, opts, stop ? &*stop : nullptr);

    httplib::Server server;
    illumine::mount_routes(server, *engine, static_dir.empty() ? std::nullopt : std::optional(static_dir));
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    int bound = port;
    if (port == 0) {
        bound = server.bind_to_any_port(host);
    } else if (!server.bind_to_port(host, port)) {
        std::cerr << "cannot bind " << host << ":" << port << '\n';
        return 1;
    }
    std::cout << "listening on " << host << ":" << bound << std::endl;
    server.listen_after_bind();
    g_server = nullptr;
    return 0;
}

int export_hierarchy(const std::string& data_dir, const std::string& out) {
    illumine::EngineOptions opts;
    opts.workers = 1;
    const auto engine = illumine::Engine::open(data_dir, opts);
    write_json(out, illumine::export_hierarchy(engine->label_hierarchy()));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label reconciliation and hierarchy annotation service"};
    app.require_subcommand(1);

    std::string data_dir, stopwords, static_dir, host = "127.0.0.1";
    int port = 8080, debounce_ms = 2000, workers = 2;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--data-dir", data_dir, "Ingested corpus directory")->required()->envname("ILLUMINE_DATA_DIR");
    serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->envname("ILLUMINE_PORT");
    serve_cmd->add_option("--host", host, "Bind address")->envname("ILLUMINE_HOST");
    serve_cmd->add_option("--stopwords", stopwords, "Stopword list")->envname("ILLUMINE_STOPWORDS");
    serve_cmd->add_option("--debounce-ms", debounce_ms, "Recompute debounce window")->envname("ILLUMINE_DEBOUNCE_MS");
    serve_cmd->add_option("--workers", workers, "Background workers")->check(CLI::PositiveNumber)->envname("ILLUMINE_WORKERS");
    serve_cmd->add_option("--static-dir", static_dir, "Client assets served under /")->envname("ILLUMINE_STATIC_DIR");

    std::string manifest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Load, merge and normalize a corpus into a data directory");
    ingest_cmd->add_option("--manifest", manifest, "Corpus manifest")->required()->envname("ILLUMINE_MANIFEST");
    ingest_cmd->add_option("--data-dir", data_dir, "Output directory")->required()->envname("ILLUMINE_DATA_DIR");
    ingest_cmd->add_option("--stopwords", stopwords, "Stopword list")->envname("ILLUMINE_STOPWORDS");

    illumine::FixtureParams fp;
    std::string out;
    auto* fixture_cmd = app.add_subcommand("fixture", "Generate a synthetic two-dataset corpus");
    fixture_cmd->add_option("--seed", fp.seed, "Random seed")->envname("ILLUMINE_SEED");
    fixture_cmd->add_option("--out", out, "Output directory")->required()->envname("ILLUMINE_OUT");
    fixture_cmd->add_option("--manuscripts", fp.n_manuscripts, "Manuscripts");
    fixture_cmd->add_option("--images", fp.n_images, "Images");
    fixture_cmd->add_option("--labels", fp.n_labels, "Distinct label terms");
    fixture_cmd->add_option("--dim", fp.dim, "Vector dimension");
    fixture_cmd->add_option("--shared-fraction", fp.shared_fraction, "Fraction of terms in both datasets");
    fixture_cmd->add_option("--unlabeled-fraction", fp.unlabeled_fraction, "Fraction of images without labels");
    fixture_cmd->add_option("--hierarchy-terms", fp.hierarchy_terms, "Terms placed in a seed hierarchy");

    auto* export_cmd = app.add_subcommand("export-hierarchy", "Write the current label hierarchy as JSON");
    export_cmd->add_option("--data-dir", data_dir, "Data directory")->required()->envname("ILLUMINE_DATA_DIR");
    export_cmd->add_option("--out", out, "Output file")->required()->envname("ILLUMINE_OUT");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd) return serve(data_dir, port, host, stopwords, debounce_ms, workers, static_dir);
        if (*ingest_cmd) return ingest(manifest, data_dir, stopwords);
        if (*fixture_cmd) {
            const auto s = illumine::generate_fixture(fp, out);
            std::cout << json{{"manuscripts", {s.manuscripts_a, s.manuscripts_b}},
                              {"images", {s.images_a, s.images_b}},
                              {"labels", {{"A", s.labels_a_only}, {"B", s.labels_b_only}, {"both", s.labels_shared}}},
                              {"raw_label_records", s.raw_label_records},
                              {"hierarchy", {{"nodes", s.hierarchy_nodes}, {"edges", s.hierarchy_edges}}}}
                             .dump(2)
                      << '\n';
            return 0;
        }
        if (*export_cmd) return export_hierarchy(data_dir, out);
    } catch (const illumine::Error& e) {
        std::cerr << "error [" << illumine::to_string(e.code()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
