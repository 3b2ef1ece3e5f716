// Copyright 2026 The clusterfetch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: build-index, serve, query, bench, gen-corpus.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clusterfetch/bench.hpp"
#include "clusterfetch/client.hpp"
#include "clusterfetch/graph_search.hpp"
#include "clusterfetch/index.hpp"
#include "clusterfetch/private_scoring.hpp"
#include "clusterfetch/server.hpp"
#include "clusterfetch/synth.hpp"
#include "json.hpp"

namespace cf = clusterfetch;

namespace {

std::uint8_t ParseComponents(const std::vector<std::string>& names) {
  std::uint8_t mask = 0;
  for (const auto& n : names) {
    if (n == "cluster") mask |= cf::kClusterFetch;
    else if (n == "doc") mask |= cf::kDocFetch;
    else if (n == "graph") mask |= cf::kGraphNodes;
    else if (n == "scoring") mask |= cf::kScoring;
    else if (n == "all") mask |= cf::kAllComponents;
    else throw cf::Error(cf::ErrorCode::kInvalidArgument, "unknown component '" + n + "'");
  }
  return mask;
}

// A JSON array, or floats separated by commas or whitespace; read from the
// file when `arg` names one.
std::vector<float> ParseEmbedding(const std::string& arg) {
  std::string text = arg;
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      return nlohmann::json::parse(text).get<std::vector<float>>();
    } catch (const nlohmann::json::exception& e) {
      throw cf::Error(cf::ErrorCode::kParse, std::string("embedding: ") + e.what());
    }
  }
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(text);
  std::vector<float> v;
  float x;
  while (in >> x) v.push_back(x);
  if (!in.eof()) throw cf::Error(cf::ErrorCode::kParse, "embedding: not a list of numbers");
  if (v.empty()) throw cf::Error(cf::ErrorCode::kParse, "embedding: empty");
  return v;
}

int BuildIndexCmd(const std::string& corpus_path, const std::string& out,
                  const cf::IndexOptions& opts) {
  const auto corpus = cf::LoadCorpus(corpus_path);
  const cf::Index index = cf::BuildIndex(corpus, opts);
  cf::SaveIndex(index, out);
  std::cerr << "indexed " << index.n_docs() << " docs, d=" << index.dim << ", k=" << index.k()
            << " -> " << out << "\n";
  return 0;
}

int ServeCmd(const std::string& index_path, const std::string& listen) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const cf::Server server(cf::LoadIndex(index_path));
  cf::TcpServer tcp(server, cf::ParseHostPort(listen));
  tcp.Start();
  std::cerr << "serving " << index_path << " on port " << tcp.port() << "\n";
  int sig = 0;
  sigwait(&signals, &sig);
  tcp.Stop();
  std::cerr << "stopped after " << server.answer_count() << " answers\n";
  return 0;
}

struct QueryArgs {
  std::string server;
  std::string embedding;
  std::string system = "cluster";
  std::size_t topk = 10;
  std::uint32_t hops = cf::kDefaultHops;
  std::uint32_t beam = cf::kDefaultBeam;
  bool fetch_content = false;
  std::string trace_path;
};

int QueryCmd(const QueryArgs& a) {
  const std::vector<float> q = ParseEmbedding(a.embedding);
  cf::TcpTransport transport(cf::ParseHostPort(a.server));
  cf::Client client(transport);
  cf::QueryTrace trace;
  std::vector<cf::RankedResult> results;

  if (a.system == "cluster") {
    trace.system = cf::kSystemClusterFetch;
    client.Setup(cf::kClusterFetch);
    results = client.Query(q, a.topk, trace);
  } else {
    const bool graph = a.system == "graph";
    if (!graph && a.system != "tiptoe") {
      throw cf::Error(cf::ErrorCode::kInvalidArgument, "unknown system '" + a.system + "'");
    }
    trace.system = graph ? cf::kSystemGraph : cf::kSystemScoring;
    client.Setup((graph ? cf::kGraphNodes : cf::kScoring) | (a.fetch_content ? cf::kDocFetch : 0));
    std::vector<std::uint64_t> ids;
    std::vector<double> scores;
    if (graph) {
      cf::SearchParams sp;
      sp.hops = a.hops;
      sp.beam = a.beam;
      sp.k = a.topk;
      auto r = cf::PrivateSearch(client, q, sp, trace);
      ids = r.doc_ids;
      scores = r.scores;
    } else {
      const std::uint32_t cluster = cf::RouteQuery(q, client.setup().centroids);
      const auto scored = cf::PrivateScore(client, q, cluster, trace);
      ids = cf::SelectTopKIds(scored, a.topk);
      for (auto id : ids) {
        for (const auto& s : scored) {
          if (s.doc_id == id) scores.push_back(static_cast<double>(s.score));
        }
      }
      trace.doc_ids = ids;
    }
    std::vector<cf::EmbeddingRecord> docs;
    if (a.fetch_content) docs = client.FetchDocs(ids, trace, a.topk);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      results.push_back({ids[i], scores[i], a.fetch_content ? docs[i].text : std::string()});
    }
  }
  trace.setup_bytes = client.setup_bytes();

  std::cout << std::fixed << std::setprecision(6);
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << i + 1 << "\t" << results[i].doc_id << "\t" << results[i].score;
    if (!results[i].text.empty()) std::cout << "\t" << results[i].text;
    std::cout << "\n";
  }
  if (!a.trace_path.empty()) {
    std::ofstream out(a.trace_path);
    out << trace.ToJson() << "\n";
    if (!out) throw cf::Error(cf::ErrorCode::kIo, "cannot write " + a.trace_path);
  }
  return 0;
}

int BenchCmd(const std::string& config_path, const std::string& out_path) {
  const cf::BenchConfig config = cf::LoadBenchConfig(config_path);
  const auto rows = cf::RunBenchmark(config);
  std::ofstream csv(out_path);
  cf::WriteBenchCsv(csv, rows);
  std::filesystem::path summary(out_path);
  summary.replace_extension(".json");
  std::ofstream json(summary);
  json << cf::BenchSummaryJson(config, rows) << "\n";
  if (!csv || !json) throw cf::Error(cf::ErrorCode::kIo, "cannot write " + out_path);
  cf::WriteBenchCsv(std::cout, rows);
  int failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private retrieval over clustered embeddings"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::string corpus_path, out_path, index_path, listen = "127.0.0.1:7070", config_path;
  std::vector<std::string> components = {"all"};
  std::uint64_t seed = 1;
  cf::IndexOptions opts;
  std::uint32_t chunk_size = cf::kDefaultChunkSize;
  auto* build = app.add_subcommand("build-index", "Build an index file from a JSONL corpus");
  build->add_option("--corpus", corpus_path, "JSONL corpus")->required();
  build->add_option("--out", out_path, "Index file to write")->required();
  build->add_option("--clusters,--k", opts.k, "Cluster count (0: round(sqrt(N)))");
  build->add_option("--chunk-size", chunk_size, "Bytes per chunk");
  build->add_option("--degree", opts.degree, "k-NN graph degree");
  build->add_option("--seed", seed, "Seed for clustering and public matrices");
  build->add_option("--components", components, "cluster, doc, graph, scoring or all")
      ->delimiter(',');

  auto* serve = app.add_subcommand("serve", "Answer queries over TCP");
  serve->add_option("--index", index_path, "Index file")->required();
  serve->add_option("--listen", listen, "host:port");

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Run one private query against a server");
  query->add_option("--server", qa.server, "host:port")->required();
  query->add_option("--embedding", qa.embedding, "File or inline list of floats")->required();
  query->add_option("--topk", qa.topk, "Results to return");
  query->add_option("--system", qa.system, "cluster, graph or tiptoe")
      ->check(CLI::IsMember({"cluster", "graph", "tiptoe"}));
  query->add_option("--hops", qa.hops, "Graph traversal hops");
  query->add_option("--beam", qa.beam, "Graph traversal beam width");
  query->add_flag("--fetch-content", qa.fetch_content, "Fetch document content (graph, tiptoe)");
  query->add_option("--trace", qa.trace_path, "Write the query trace as JSON");

  auto* bench = app.add_subcommand("bench", "Run the size sweep");
  bench->add_option("--config", config_path, "key = value config file")->required();
  bench->add_option("--out", out_path, "CSV output")->required();

  cf::SynthOptions so;
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic JSONL corpus");
  gen->add_option("--n", so.n_docs, "Documents");
  gen->add_option("--dim", so.dim, "Embedding dimension");
  gen->add_option("--blobs", so.n_blobs, "Mixture components");
  gen->add_option("--std", so.blob_std, "Per-coordinate noise");
  gen->add_option("--text-len", so.text_len, "Filler text bytes");
  gen->add_option("--seed", so.seed, "Seed");
  gen->add_option("--out", out_path, "JSONL file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*build) {
      opts.chunk_size = chunk_size;
      opts.seed = cf::SeedFromInt(seed);
      opts.components = ParseComponents(components);
      return BuildIndexCmd(corpus_path, out_path, opts);
    }
    if (*serve) return ServeCmd(index_path, listen);
    if (*query) return QueryCmd(qa);
    if (*bench) return BenchCmd(config_path, out_path);
    if (*gen) {
      const auto corpus = cf::GenSyntheticCorpus(so);
      std::ofstream out(out_path);
      cf::WriteCorpus(out, corpus.records);
      if (!out) throw cf::Error(cf::ErrorCode::kIo, "cannot write " + out_path);
      return 0;
    }
  } catch (const cf::Error& e) {
    std::cerr << "error [" << cf::ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
