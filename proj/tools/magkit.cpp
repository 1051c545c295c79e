// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

// magkit command-line front end. One subcommand per pipeline; every failure
// ends in a single "error: kind=<kind> msg=<message>" line on stderr and the
// exit code of its kind (1 usage, 2 data, 3 numerical).

// magkit (Eigen) goes before httplib: <resolv.h> defines a _res macro.
#include "magkit/fetch.hpp"
#include "magkit/io.hpp"
#include "magkit/magkit.hpp"
#include "magkit/matfile.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using magkit::Matrix;
using magkit::Vector;
using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSchema = 1;

void emit(const std::string& out, const std::string& contents) {
  if (out.empty() || out == "-") {
    std::cout << contents;
  } else {
    magkit::io::write_atomic(out, contents);
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

magkit::PointCloud load_points(const std::string& path, const std::string& drop_col = "") {
  auto table = magkit::io::read_csv(path, drop_col);
  return magkit::PointCloud(std::move(table.values));
}

void require_distinct(const magkit::PointCloud& cloud) {
  magkit::detail::require_distinct_rows(cloud.points(), "input");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// "default" selects the built-in grid; otherwise a comma list.
std::vector<double> parse_t_grid(const std::string& text) {
  if (text == "default" || text == "paper") return magkit::default_t_grid();
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double t = std::stod(item, &used);
      if (used != item.size() || !(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("");
      grid.push_back(t);
    } catch (const std::exception&) {
      throw magkit::UsageError("bad t-grid entry '" + item + "'");
    }
  }
  if (grid.empty()) throw magkit::UsageError("t-grid is empty");
  return grid;
}

std::vector<bool> to_binary_labels(const std::vector<double>& raw) {
  std::vector<bool> out;
  for (double v : raw) {
    if (v != 0.0 && v != 1.0) throw magkit::InputError("outlier labels must be 0 or 1");
    out.push_back(v == 1.0);
  }
  return out;
}

std::vector<int> to_class_labels(const std::vector<double>& raw) {
  std::vector<int> out;
  for (double v : raw) {
    if (v != std::round(v)) throw magkit::InputError("class labels must be integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// weight ------------------------------------------------------------------

struct WeightArgs {
  std::string input, out, metric = "l2", drop;
  double t = 1.0;
};

int run_weight(const WeightArgs& a) {
  const auto cloud = load_points(a.input, a.drop);
  require_distinct(cloud);
  const auto zeta = magkit::similarity_matrix(
      magkit::pairwise_distances(cloud, magkit::parse_metric(a.metric)), magkit::Scale{a.t});
  const auto wv = magkit::weighting_vector(zeta);
  std::string csv = "index,weight\n";
  for (Eigen::Index i = 0; i < wv.w.size(); ++i) {
    csv += std::to_string(i) + "," + magkit::io::format_double(wv.w[i]) + "\n";
  }
  emit(a.out, csv);
  return 0;
}

// magnitude-fn ------------------------------------------------------------

struct MagFnArgs {
  std::string input, out, metric = "l2", drop;
  double t_min = 1e-3, t_max = 1e2;
  int per_decade = 50;
};

int run_magnitude_fn(const MagFnArgs& a) {
  const auto cloud = load_points(a.input, a.drop);
  const auto dist = magkit::pairwise_distances(cloud, magkit::parse_metric(a.metric));
  const auto series =
      magkit::magnitude_function(dist, magkit::log_grid(a.t_min, a.t_max, a.per_decade));
  std::string csv = "t,magnitude\n";
  for (std::size_t i = 0; i < series.ts.size(); ++i) {
    csv += magkit::io::format_double(series.ts[i]) + "," +
           (series.mags[i] ? magkit::io::format_double(*series.mags[i]) : "nan") + "\n";
  }
  emit(a.out, csv);
  if (series.gap_count() > 0) {
    std::cerr << "warning: " << series.gap_count()
              << " scale(s) could not be solved accurately and are written as nan\n";
  }
  return 0;
}

// approx-bench ------------------------------------------------------------

struct ApproxArgs {
  std::string input, out, ball = "linf", drop;
  double t = 50.0, h = 0.03;
};

json error_summary(const Vector& exact, const Vector& approx) {
  const Vector diff = exact - approx;
  return {{"l2", diff.norm()}, {"linf", diff.cwiseAbs().maxCoeff()}};
}

int run_approx_bench(const ApproxArgs& a) {
  using clock = std::chrono::steady_clock;
  const auto cloud = load_points(a.input, a.drop);
  require_distinct(cloud);
  magkit::CountBall ball;
  if (a.ball == "linf") {
    ball = magkit::CountBall::linf;
  } else if (a.ball == "l2") {
    ball = magkit::CountBall::l2;
  } else {
    throw magkit::UsageError("ball must be linf or l2");
  }

  auto start = clock::now();
  const auto dist = magkit::pairwise_distances(cloud);
  const auto zeta = magkit::similarity_matrix(dist, magkit::Scale{a.t});
  const Vector exact = magkit::weighting_vector(zeta).w;
  const double exact_s = seconds_since(start);

  start = clock::now();
  const Vector kde = magkit::weight_approx_kde(zeta);
  const double kde_s = seconds_since(start);

  start = clock::now();
  const Vector rect = magkit::weight_approx_rect(cloud, a.h, true, ball);
  const double rect_s = seconds_since(start);
  const Vector rect_raw = magkit::weight_approx_rect(cloud, a.h, false, ball);

  const auto scatter = magkit::scatter_report(dist, magkit::Scale{a.t});
  json doc = {
      {"schema", kSchema},
      {"n", cloud.size()},
      {"dim", cloud.dim()},
      {"t", a.t},
      {"h", a.h},
      {"ball", a.ball},
      {"scatter",
       {{"is_scattered", scatter.is_scattered},
        {"eps_min", scatter.eps_min ? json(*scatter.eps_min) : json(nullptr)},
        {"t_required", std::isfinite(scatter.t_required) ? json(scatter.t_required) : json(nullptr)},
        {"bound", scatter.bound ? json(*scatter.bound) : json(nullptr)}}},
      {"magnitude", exact.sum()},
      {"errors",
       {{"kde", error_summary(exact, kde)},
        {"rect", error_summary(exact, rect)},
        {"rect_unnormalized", error_summary(exact, rect_raw)}}},
      {"seconds", {{"exact", exact_s}, {"kde", kde_s}, {"rect", rect_s}}},
  };
  emit(a.out, dump(doc));
  return 0;
}

// outlier -----------------------------------------------------------------

struct OutlierArgs {
  std::string inliers, eval, labels_col = "label", t_grid = "default", out, metric = "l2";
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::size_t max_train = 1000;
};

int run_outlier(const OutlierArgs& a) {
  // The training file may carry the label column; only rows labeled 0 are
  // used as inliers then.
  auto train_table = magkit::io::read_csv(a.inliers);
  const auto& hdr = train_table.header;
  if (std::find(hdr.begin(), hdr.end(), a.labels_col) != hdr.end()) {
    train_table = magkit::io::read_csv(a.inliers, a.labels_col);
    const auto labels = to_binary_labels(train_table.labels);
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!labels[i]) keep.push_back(static_cast<Eigen::Index>(i));
    }
    train_table.values = Matrix(train_table.values(keep, Eigen::all));
  }
  const auto eval = magkit::io::read_csv(a.eval, a.labels_col);
  if (eval.values.cols() != train_table.values.cols()) {
    throw magkit::InputError("training and evaluation files differ in dimension");
  }
  const auto labels = to_binary_labels(eval.labels);

  // Each evaluation row goes to validation or test with probability 1/2.
  magkit::Rng rng(a.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> val_rows, test_rows;
  std::vector<bool> val_labels, test_labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (rng.coin()) {
      val_rows.push_back(static_cast<Eigen::Index>(i));
      val_labels.push_back(labels[i]);
    } else {
      test_rows.push_back(static_cast<Eigen::Index>(i));
      test_labels.push_back(labels[i]);
    }
  }
  const Matrix validation = eval.values(val_rows, Eigen::all);
  const Matrix test = eval.values(test_rows, Eigen::all);
  if (test_rows.empty()) throw magkit::InputError("evaluation split left the test set empty");

  magkit::OutlierFitOptions opts;
  opts.k = a.k;
  opts.max_train = a.max_train;
  opts.metric = magkit::parse_metric(a.metric);
  const magkit::PointCloud train(train_table.values);
  const auto grid = parse_t_grid(a.t_grid);
  const auto search = magkit::t_search(train, validation, val_labels, grid, a.seed, opts);
  const auto model = magkit::fit(train, magkit::Scale{search.best_t}, a.seed, opts);
  const auto metrics = magkit::evaluate(magkit::score_batch(model, test), test_labels,
                                        std::min(a.k, test_labels.size()));

  json grid_json = json::array();
  for (const auto& g : search.grid) {
    grid_json.push_back({{"t", g.t},
                         {"validation_auc", g.validation_auc ? json(*g.validation_auc)
                                                             : json(nullptr)}});
  }
  json doc = {
      {"schema", kSchema},
      {"seed", a.seed},
      {"k", metrics.k},
      {"sizes",
       {{"train", model.train.rows()},
        {"validation", validation.rows()},
        {"test", test.rows()}}},
      {"search", {{"best_t", search.best_t}, {"best_auc", search.best_auc}, {"grid", grid_json}}},
      {"test",
       {{"precision_at_k", metrics.precision_at_k},
        {"recall_at_k", metrics.recall_at_k},
        {"f1_at_k", metrics.f1_at_k},
        {"auc", metrics.auc}}},
  };
  emit(a.out, dump(doc));
  return 0;
}

// fetch-odds --------------------------------------------------------------

struct FetchArgs {
  std::string name, dir = "data", manifest;
  bool allow_network = false;
};

std::string https_get(const std::string& url) {
  const std::string prefix = "https://";
  const auto slash = url.find('/', prefix.size());
  const std::string host = url.substr(prefix.size(), slash - prefix.size());
  const std::string path = slash == std::string::npos ? "/" : url.substr(slash);
  httplib::SSLClient client(host);
  client.enable_server_certificate_verification(true);
  client.set_follow_location(true);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  auto res = client.Get(path);
  if (!res) throw magkit::fetch::OfflineError(httplib::to_string(res.error()));
  if (res->status != 200) {
    throw magkit::InputError("GET " + url + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

// Writes <stem>.csv next to the .mat file: features x0..x{d-1} then "label".
fs::path mat_to_csv(const fs::path& mat) {
  const auto vars = magkit::io::MatFileReader::read(mat);
  if (!vars.count("X") || !vars.count("y")) {
    throw magkit::InputError("'" + mat.string() + "' lacks the X and y arrays");
  }
  const Matrix& x = vars.at("X");
  const Matrix& y = vars.at("y");
  if (y.size() != x.rows()) throw magkit::InputError("X and y differ in length");
  std::string csv;
  for (Eigen::Index k = 0; k < x.cols(); ++k) csv += "x" + std::to_string(k) + ",";
  csv += "label\n";
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) csv += magkit::io::format_double(x(i, k)) + ",";
    csv += magkit::io::format_double(y(i)) + "\n";
  }
  fs::path out = mat;
  out.replace_extension(".csv");
  magkit::io::write_atomic(out, csv);
  return out;
}

int run_fetch(const FetchArgs& a) {
  auto catalog = magkit::fetch::default_catalog();
  if (!a.manifest.empty()) magkit::fetch::load_manifest(catalog, a.manifest);
  const auto r = magkit::fetch::fetch_dataset(a.name, a.dir, catalog, a.allow_network, https_get);
  if (r.skipped) {
    std::cerr << "skipped: " << r.message << "\n";
    return 0;
  }
  const auto csv = mat_to_csv(r.path);
  std::cout << (r.downloaded ? "fetched: " : "cached: ") << r.path.string() << "\n"
            << "converted: " << csv.string() << "\n";
  return 0;
}

// active-learn ------------------------------------------------------------

struct ActiveArgs {
  std::string pool, labels_col, strategy = "weighting", out;
  std::size_t budget = 100, seeds = 100;
  std::uint64_t seed_base = 0;
  double t = 1.0, gamma = 0.1, ridge = 1e-8;
};

int run_active(const ActiveArgs& a) {
  const auto table = magkit::io::read_csv(a.pool, a.labels_col);
  const auto labels = to_class_labels(table.labels);
  magkit::ALOptions opts;
  opts.query_t = a.t;
  opts.kernel_gamma = a.gamma;
  opts.ridge = a.ridge;
  const auto rows = magkit::run_al_experiment(table.values, labels,
                                              magkit::parse_strategy(a.strategy), a.budget,
                                              a.seeds, a.seed_base, opts);
  std::string csv = "iteration,mean_labels,mean_accuracy,stdev_accuracy,runs\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.iteration) + "," + magkit::io::format_double(r.mean_labels) + "," +
           magkit::io::format_double(r.mean_accuracy) + "," +
           magkit::io::format_double(r.stdev_accuracy) + "," + std::to_string(r.runs) + "\n";
  }
  emit(a.out, csv);
  return 0;
}

// graph-weight ------------------------------------------------------------

struct GraphArgs {
  std::string edges, metric = "resistance", out;
  double t = 6.0;
  std::size_t nodes = 0;
};

int run_graph(const GraphArgs& a) {
  const auto g = magkit::io::read_edge_list(
      a.edges, a.nodes > 0 ? std::optional<std::size_t>(a.nodes) : std::nullopt);
  g.require_connected();
  const auto gw = magkit::graph_weighting(g, magkit::parse_graph_metric(a.metric),
                                          magkit::Scale{a.t});
  if (!gw.ok()) {
    std::ostringstream msg;
    msg << gw.failure << "; the graph is scattered for t > " << gw.scatter.t_required
        << " (try --t " << gw.suggested_t << ")";
    throw magkit::NumericalError(msg.str());
  }
  std::string csv = "node,degree,weight\n";
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    csv += std::to_string(v) + "," + std::to_string(g.degree(v)) + "," +
           magkit::io::format_double(gw.weights->w[static_cast<Eigen::Index>(v)]) + "\n";
  }
  emit(a.out, csv);
  return 0;
}

int fail(const char* kind, int code, const std::string& what) {
  std::string flat = what;
  std::replace(flat.begin(), flat.end(), '\n', ' ');
  std::cerr << "error: kind=" << kind << " msg=" << flat << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magkit: magnitude and weighting vectors of finite metric spaces"};
  app.require_subcommand(1);
  // "--h" is the box half-width of approx-bench, so help is long-form only.
  app.set_help_flag("--help", "print this help message and exit");
  std::function<int()> action;

  WeightArgs weight;
  auto* w = app.add_subcommand("weight", "weighting vector of a point cloud");
  w->add_option("--input", weight.input, "points CSV")->required();
  w->add_option("--t", weight.t, "scale")->capture_default_str();
  w->add_option("--metric", weight.metric, "l1, l2 or linf")->capture_default_str();
  w->add_option("--drop-col", weight.drop, "column to ignore (name or index)");
  w->add_option("--out", weight.out, "output CSV (stdout when omitted)");
  w->callback([&] { action = [&] { return run_weight(weight); }; });

  MagFnArgs magfn;
  auto* m = app.add_subcommand("magnitude-fn", "magnitude function on a log grid");
  m->add_option("--input", magfn.input, "points CSV")->required();
  m->add_option("--metric", magfn.metric)->capture_default_str();
  m->add_option("--t-min", magfn.t_min)->capture_default_str();
  m->add_option("--t-max", magfn.t_max)->capture_default_str();
  m->add_option("--per-decade", magfn.per_decade)->capture_default_str();
  m->add_option("--drop-col", magfn.drop, "column to ignore (name or index)");
  m->add_option("--out", magfn.out, "output CSV (stdout when omitted)");
  m->callback([&] { action = [&] { return run_magnitude_fn(magfn); }; });

  ApproxArgs approx;
  auto* ab = app.add_subcommand("approx-bench", "exact versus approximate weights");
  ab->add_option("--input", approx.input, "points CSV")->required();
  ab->add_option("--t", approx.t)->capture_default_str();
  ab->add_option("--h", approx.h, "box half-width")->capture_default_str();
  ab->add_option("--ball", approx.ball, "linf or l2")->capture_default_str();
  ab->add_option("--drop-col", approx.drop, "column to ignore (name or index)");
  ab->add_option("--out", approx.out, "output JSON (stdout when omitted)");
  ab->callback([&] { action = [&] { return run_approx_bench(approx); }; });

  OutlierArgs outlier;
  auto* o = app.add_subcommand("outlier", "weighting-score outlier detection");
  o->add_option("--inliers", outlier.inliers, "training inliers CSV")->required();
  o->add_option("--eval", outlier.eval, "labeled evaluation CSV")->required();
  o->add_option("--labels-col", outlier.labels_col, "label column (1 = outlier)")
      ->capture_default_str();
  o->add_option("--k", outlier.k)->capture_default_str();
  o->add_option("--t-grid", outlier.t_grid, "'default' or a comma-separated list")
      ->capture_default_str();
  o->add_option("--metric", outlier.metric)->capture_default_str();
  o->add_option("--max-train", outlier.max_train)->capture_default_str();
  o->add_option("--seed", outlier.seed)->required();
  o->add_option("--out", outlier.out, "output JSON (stdout when omitted)");
  o->callback([&] { action = [&] { return run_outlier(outlier); }; });

  FetchArgs fetch;
  auto* f = app.add_subcommand("fetch-odds", "download and verify an ODDS benchmark file");
  f->add_option("--name", fetch.name)->required();
  f->add_option("--dir", fetch.dir)->capture_default_str();
  f->add_option("--manifest", fetch.manifest, "JSON file pinning url and sha256");
  f->add_flag("--allow-network", fetch.allow_network, "permit network access");
  f->callback([&] { action = [&] { return run_fetch(fetch); }; });

  ActiveArgs active;
  auto* al = app.add_subcommand("active-learn", "seeded active-learning curves");
  al->add_option("--pool", active.pool, "labeled pool CSV")->required();
  al->add_option("--labels-col", active.labels_col)->required();
  al->add_option("--strategy", active.strategy, "weighting or uncertainty")
      ->capture_default_str();
  al->add_option("--budget", active.budget)->capture_default_str();
  al->add_option("--seeds", active.seeds)->capture_default_str();
  al->add_option("--seed-base", active.seed_base)->capture_default_str();
  al->add_option("--t", active.t, "scale of the query-side weighting")->capture_default_str();
  al->add_option("--gamma", active.gamma, "Laplacian kernel parameter")->capture_default_str();
  al->add_option("--ridge", active.ridge)->capture_default_str();
  al->add_option("--out", active.out, "output CSV (stdout when omitted)");
  al->callback([&] { action = [&] { return run_active(active); }; });

  GraphArgs graph;
  auto* gr = app.add_subcommand("graph-weight", "weighting vector of a graph metric");
  gr->add_option("--edges", graph.edges, "edge list, one 'u v' per line")->required();
  gr->add_option("--metric", graph.metric, "resistance or shortest_path")
      ->capture_default_str();
  gr->add_option("--t", graph.t)->capture_default_str();
  gr->add_option("--nodes", graph.nodes, "node count (default: largest index + 1)");
  gr->add_option("--out", graph.out, "output CSV (stdout when omitted)");
  gr->callback([&] { action = [&] { return run_graph(graph); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", 1, e.what());
  }

  try {
    return action();
  } catch (const magkit::Error& e) {
    return fail(magkit::kind_name(e.kind()), magkit::exit_code(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("data", 2, e.what());
  }
}
