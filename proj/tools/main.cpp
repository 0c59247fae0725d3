// Command-line driver: data generation, training, evaluation, queries,
// sweeps, and gradient checking.

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "pronsim/checkpoint.hpp"
#include "pronsim/datagen.hpp"
#include "pronsim/gradcheck.hpp"
#include "pronsim/io.hpp"
#include "pronsim/tasks.hpp"
#include "pronsim/train.hpp"

namespace fs = std::filesystem;
using namespace pronsim;

namespace {

struct TrainFlags {
  std::string inventory, lexicon, train, dev;
  std::string arch = "rank";
  std::string encoder = "2lstm";
  std::string negative_mode = "canonical";
  std::size_t phone_embed_dim = 64;
  std::size_t hidden_dim = 32;
  std::size_t embed_dim = 120;  // rank embedding size n
  std::size_t step_dim = 32;    // binary per-step layer width
  bool final_relu = false;
  TrainConfig cfg;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_arch = true) {
  cmd->add_option("--inventory", f.inventory, "phone inventory file")->required();
  cmd->add_option("--lexicon", f.lexicon, "lexicon file")->required();
  cmd->add_option("--train", f.train, "training corpus file")->required();
  cmd->add_option("--dev", f.dev, "development corpus file")->required();
  if (with_arch)
    cmd->add_option("--arch", f.arch, "architecture: binary | rank")
        ->check(CLI::IsMember({"binary", "rank"}));
  cmd->add_option("--encoder", f.encoder, "encoder: lstm | 2lstm | bi2lstm")
      ->check(CLI::IsMember({"lstm", "2lstm", "bi2lstm"}));
  cmd->add_option("--lr", f.cfg.learning_rate, "Adagrad learning rate");
  cmd->add_option("--margin", f.cfg.margin, "ranking hinge margin");
  cmd->add_option("--negatives", f.cfg.negatives_per_positive,
                  "negative samples per positive example");
  cmd->add_option("--epochs", f.cfg.epochs, "training epochs");
  cmd->add_option("--batch-size", f.cfg.batch_size, "minibatch size");
  cmd->add_option("--seed", f.cfg.seed, "random seed");
  cmd->add_option("--negative-mode", f.negative_mode,
                  "negative source: canonical | surface")
      ->check(CLI::IsMember({"canonical", "surface"}));
  cmd->add_option("--phone-embed-dim", f.phone_embed_dim, "phone embedding size");
  cmd->add_option("--hidden-dim", f.hidden_dim, "LSTM hidden size");
  cmd->add_option("--embed-dim", f.embed_dim, "pronunciation embedding size n");
  cmd->add_option("--step-dim", f.step_dim, "binary per-step layer width");
  cmd->add_flag("--final-relu", f.final_relu,
                "apply ReLU to the embedding output as well");
}

struct LoadedData {
  PhoneInventory inv;
  Lexicon lex;
  Corpus train, dev;
};

LoadedData load_train_data(const TrainFlags& f) {
  PhoneInventory inv = parse_inventory(read_file(f.inventory));
  Lexicon lex = parse_lexicon(read_file(f.lexicon), inv);
  Corpus train = parse_corpus(read_file(f.train), inv, lex);
  Corpus dev = parse_corpus(read_file(f.dev), inv, lex);
  return {std::move(inv), std::move(lex), std::move(train), std::move(dev)};
}

std::size_t binary_t_max(const Corpus& train, const Lexicon& lex) {
  std::size_t t = 1;
  for (const auto& ex : train) t = std::max(t, ex.surface.size());
  for (const auto& e : lex.entries()) t = std::max(t, e.canonical.size());
  return t;
}

std::string kv_train_report(const TrainFlags& f, const TrainReport& report) {
  std::ostringstream os;
  os << "seed\t" << f.cfg.seed << "\narch\t" << f.arch << "\nencoder\t"
     << f.encoder << "\nepochs\t" << report.epochs.size()
     << "\nselected_epoch\t" << report.selected_epoch << '\n';
  for (std::size_t i = 0; i < report.epochs.size(); ++i) {
    const auto& e = report.epochs[i];
    os << "epoch." << i << ".mean_loss\t" << e.mean_loss << '\n'
       << "epoch." << i << ".dev_wer1\t" << e.dev_wer1 << '\n'
       << "epoch." << i << ".dev_wer2\t" << e.dev_wer2 << '\n';
  }
  return os.str();
}

// Trains a rank model with the given flags and returns it with its report.
std::pair<RankModel, TrainReport> train_rank(const TrainFlags& f,
                                             const LoadedData& data,
                                             TrainConfig cfg) {
  const EncoderConfig ecfg =
      encoder_config_from_name(f.encoder, f.phone_embed_dim, f.hidden_dim);
  Rng init_rng = Rng(cfg.seed).stream(7);
  RankModel model = RankModel::init(ecfg, data.inv.size(), f.embed_dim,
                                    f.final_relu, init_rng);
  TrainReport report = fit(model, data.train, data.lex, data.dev, cfg);
  return {std::move(model), std::move(report)};
}

Scorer build_scorer(const std::string& kind, const std::string& checkpoint,
                    const PhoneInventory& inv,
                    std::shared_ptr<void>& keepalive) {
  if (kind == "levenshtein") return make_levenshtein_scorer();
  if (kind == "exact") return make_exact_scorer();
  if (checkpoint.empty())
    throw std::runtime_error("--checkpoint required for scorer '" + kind + "'");
  if (kind == "rank") {
    auto model = std::make_shared<RankModel>(
        load_rank_checkpoint(checkpoint, inv.hash()));
    keepalive = model;
    return make_rank_scorer(model);
  }
  if (kind == "binary") {
    auto model = std::make_shared<BinaryModel>(
        load_binary_checkpoint(checkpoint, inv.hash()));
    keepalive = model;
    return make_binary_scorer(model);
  }
  throw std::runtime_error("unknown scorer: " + kind);
}

std::string eval_report_kv(const EvalReport& r, const std::string& scorer) {
  std::ostringstream os;
  os << "scorer\t" << scorer << "\nexamples\t" << r.example_count << "\nwer1\t"
     << r.wer1 << "\nwer2\t" << r.wer2 << '\n';
  return os.str();
}

std::string eval_report_tsv(const EvalReport& r) {
  std::ostringstream os;
  for (const auto& row : r.rows) {
    os << row.word << '\t';
    for (std::size_t i = 0; i < row.predicted.size(); ++i) {
      if (i) os << ',';
      os << row.predicted[i];
    }
    os << '\n';
  }
  return os.str();
}

std::string svg_scatter(const std::vector<ProjectedPoint>& pts) {
  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p.x); xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y); ymax = std::max(ymax, p.y);
  }
  const double w = 800, h = 600, m = 50;
  const double sx = (xmax > xmin) ? (w - 2 * m) / (xmax - xmin) : 1.0;
  const double sy = (ymax > ymin) ? (h - 2 * m) / (ymax - ymin) : 1.0;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
     << "\" height=\"" << h << "\">\n";
  for (const auto& p : pts) {
    const double x = m + (p.x - xmin) * sx;
    const double y = h - m - (p.y - ymin) * sy;
    os << "  <circle cx=\"" << x << "\" cy=\"" << y
       << "\" r=\"3\" fill=\"steelblue\"/>\n"
       << "  <text x=\"" << x + 4 << "\" y=\"" << y - 4
       << "\" font-size=\"9\">" << p.word << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

int run(int argc, char** argv) {
  CLI::App app{"pronunciation similarity learning toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file (flags take precedence)");

  // ---- gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  struct {
    std::string out;
    std::string inventory, lexicon, rules;
    std::size_t words = 100, variants = 10;
    double train_frac = 0.7, dev_frac = 0.15, test_frac = 0.15;
    std::uint64_t seed = 1;
  } g;
  gen->add_option("--out", g.out, "output directory")->required();
  gen->add_option("--inventory", g.inventory, "phone inventory (default: built-in)");
  gen->add_option("--lexicon", g.lexicon, "lexicon (default: synthesized)");
  gen->add_option("--rules", g.rules, "noise rule file (default: built-in pack)");
  gen->add_option("--words", g.words, "synthesized lexicon size");
  gen->add_option("--variants", g.variants, "surface variants per word");
  gen->add_option("--train-frac", g.train_frac);
  gen->add_option("--dev-frac", g.dev_frac);
  gen->add_option("--test-frac", g.test_frac);
  gen->add_option("--seed", g.seed, "random seed");
  gen->callback([&g] {
    PhoneInventory inv = g.inventory.empty()
                             ? default_inventory()
                             : parse_inventory(read_file(g.inventory));
    Rng lex_rng = Rng(g.seed).stream(2);
    Lexicon lex = g.lexicon.empty()
                      ? synth_lexicon(inv, g.words, lex_rng)
                      : parse_lexicon(read_file(g.lexicon), inv);
    GenConfig cfg;
    cfg.rules = g.rules.empty() ? default_rules(inv)
                                : parse_rules(read_file(g.rules), inv);
    cfg.variants_per_word = g.variants;
    cfg.train_frac = g.train_frac;
    cfg.dev_frac = g.dev_frac;
    cfg.test_frac = g.test_frac;
    cfg.seed = g.seed;
    const SynthCorpus corpus = synth_corpus(lex, cfg);

    fs::create_directories(g.out);
    auto path = [&g](const char* name) { return (fs::path(g.out) / name).string(); };
    write_file(path("inventory.txt"), format_inventory(inv));
    write_file(path("lexicon.tsv"), format_lexicon(lex, inv));
    write_file(path("rules.tsv"), format_rules(cfg.rules, inv));
    write_file(path("train.tsv"), format_corpus(corpus.train, inv));
    write_file(path("dev.tsv"), format_corpus(corpus.dev, inv));
    write_file(path("test.tsv"), format_corpus(corpus.test, inv));
    std::ostringstream meta;
    meta << "# seed=" << g.seed << "\nwords\t" << lex.size() << "\nvariants\t"
         << cfg.variants_per_word << "\ntrain_examples\t" << corpus.train.size()
         << "\ndev_examples\t" << corpus.dev.size() << "\ntest_examples\t"
         << corpus.test.size() << '\n';
    write_file(path("gen.meta"), meta.str());
    std::cout << "wrote corpus to " << g.out << " (" << corpus.train.size()
              << " train / " << corpus.dev.size() << " dev / "
              << corpus.test.size() << " test examples)\n";
  });

  // ---- train --------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a similarity model");
  TrainFlags tf;
  std::string train_out, train_report_path;
  add_train_flags(train_cmd, tf);
  train_cmd->add_option("--out", train_out, "checkpoint output path")->required();
  train_cmd->add_option("--report", train_report_path,
                        "report path prefix (default: <out>.report)");
  train_cmd->callback([&tf, &train_out, &train_report_path] {
    tf.cfg.negative_mode = tf.negative_mode == "surface"
                               ? NegativeMode::Surface
                               : NegativeMode::Canonical;
    const LoadedData data = load_train_data(tf);
    TrainReport report;
    if (tf.arch == "rank") {
      auto [model, rep] = train_rank(tf, data, tf.cfg);
      save_checkpoint(train_out, model, data.inv.hash());
      report = std::move(rep);
    } else {
      const EncoderConfig ecfg = encoder_config_from_name(
          tf.encoder, tf.phone_embed_dim, tf.hidden_dim);
      Rng init_rng = Rng(tf.cfg.seed).stream(7);
      BinaryModel model =
          BinaryModel::init(ecfg, data.inv.size(),
                            binary_t_max(data.train, data.lex), tf.step_dim,
                            init_rng);
      report = fit(model, data.train, data.lex, data.dev, tf.cfg);
      save_checkpoint(train_out, model, data.inv.hash());
    }
    const std::string prefix =
        train_report_path.empty() ? train_out + ".report" : train_report_path;
    write_file(prefix + ".txt",
               "# seed=" + std::to_string(tf.cfg.seed) + "\n" +
                   format_train_report(report));
    write_file(prefix + ".kv", kv_train_report(tf, report));
    std::cout << "selected epoch " << report.selected_epoch << ", dev WER@1 "
              << report.epochs[report.selected_epoch].dev_wer1 << "%\n";
  });

  // ---- eval ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "evaluate lexical access WER");
  struct {
    std::string inventory, lexicon, corpus, checkpoint, out;
    std::string scorer = "rank";
  } ev;
  eval_cmd->add_option("--inventory", ev.inventory)->required();
  eval_cmd->add_option("--lexicon", ev.lexicon)->required();
  eval_cmd->add_option("--corpus", ev.corpus, "evaluation corpus")->required();
  eval_cmd->add_option("--scorer", ev.scorer,
                       "rank | binary | levenshtein | exact")
      ->check(CLI::IsMember({"rank", "binary", "levenshtein", "exact"}));
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "model checkpoint");
  eval_cmd->add_option("--out", ev.out, "output directory")->required();
  eval_cmd->callback([&ev] {
    PhoneInventory inv = parse_inventory(read_file(ev.inventory));
    Lexicon lex = parse_lexicon(read_file(ev.lexicon), inv);
    Corpus corpus = parse_corpus(read_file(ev.corpus), inv, lex);
    std::shared_ptr<void> keepalive;
    const Scorer scorer = build_scorer(ev.scorer, ev.checkpoint, inv, keepalive);
    const EvalReport report = evaluate(corpus, lex, scorer);
    fs::create_directories(ev.out);
    write_file((fs::path(ev.out) / "eval.kv").string(),
               eval_report_kv(report, ev.scorer));
    write_file((fs::path(ev.out) / "predictions.tsv").string(),
               eval_report_tsv(report));
    std::cout << "WER@1 " << report.wer1 << "%  WER@2 " << report.wer2
              << "%  (" << report.example_count << " examples)\n";
  });

  // ---- neighbors ----------------------------------------------------------
  auto* nb = app.add_subcommand("neighbors", "word neighborhood / nearest words");
  struct {
    std::string inventory, lexicon, checkpoint, word;
    std::string scorer = "rank";
    std::string mode = "at-least";
    std::size_t m = 0;
    double theta = -1.0;
    bool has_theta = false;
  } n;
  nb->add_option("--inventory", n.inventory)->required();
  nb->add_option("--lexicon", n.lexicon)->required();
  nb->add_option("--checkpoint", n.checkpoint);
  nb->add_option("--scorer", n.scorer, "rank | binary | levenshtein")
      ->check(CLI::IsMember({"rank", "binary", "levenshtein"}));
  nb->add_option("--word", n.word, "query word")->required();
  nb->add_option("--m", n.m, "return the m nearest words");
  nb->add_option("--theta", n.theta, "neighborhood threshold")
      ->each([&n](const std::string&) { n.has_theta = true; });
  nb->add_option("--mode", n.mode, "at-least | literal")
      ->check(CLI::IsMember({"at-least", "literal"}));
  nb->callback([&n] {
    if ((n.m == 0) == !n.has_theta)
      throw std::runtime_error("give exactly one of --m or --theta");
    PhoneInventory inv = parse_inventory(read_file(n.inventory));
    Lexicon lex = parse_lexicon(read_file(n.lexicon), inv);
    std::shared_ptr<void> keepalive;
    const Scorer scorer = build_scorer(n.scorer, n.checkpoint, inv, keepalive);
    std::vector<std::string> words;
    if (n.m > 0) {
      words = nearest_words(n.word, lex, scorer, n.m);
    } else {
      words = word_neighborhood(n.word, lex, scorer, n.theta,
                                n.mode == "literal"
                                    ? NeighborhoodMode::Literal
                                    : NeighborhoodMode::SimilarityAtLeast);
    }
    for (const auto& w : words) std::cout << w << '\n';
  });

  // ---- embed --------------------------------------------------------------
  auto* em = app.add_subcommand("embed", "embed every canonical pronunciation");
  struct {
    std::string inventory, lexicon, checkpoint, out;
  } e;
  em->add_option("--inventory", e.inventory)->required();
  em->add_option("--lexicon", e.lexicon)->required();
  em->add_option("--checkpoint", e.checkpoint, "rank checkpoint")->required();
  em->add_option("--out", e.out, "output TSV")->required();
  em->callback([&e] {
    PhoneInventory inv = parse_inventory(read_file(e.inventory));
    Lexicon lex = parse_lexicon(read_file(e.lexicon), inv);
    RankModel model = load_rank_checkpoint(e.checkpoint, inv.hash());
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& entry : lex.entries()) {
      const Tensor u = embed_pronunciation(entry.canonical, model);
      os << entry.word;
      for (std::size_t i = 0; i < u.size(); ++i) os << '\t' << u[i];
      os << '\n';
    }
    write_file(e.out, os.str());
  });

  // ---- project ------------------------------------------------------------
  auto* pj = app.add_subcommand("project", "2-D PCA projection of embeddings");
  struct {
    std::string embeddings, out, svg;
  } p;
  pj->add_option("--embeddings", p.embeddings, "TSV from `embed`")->required();
  pj->add_option("--out", p.out, "output TSV (word, x, y)")->required();
  pj->add_option("--svg", p.svg, "optional scatter drawing");
  pj->callback([&p] {
    std::vector<std::string> words;
    std::vector<Tensor> embeds;
    std::istringstream is(read_file(p.embeddings));
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string word;
      ls >> word;
      std::vector<double> vals;
      double v;
      while (ls >> v) vals.push_back(v);
      if (vals.empty()) throw std::runtime_error("bad embeddings line: " + line);
      Tensor t = Tensor::vec(vals.size());
      t.data = vals;
      words.push_back(word);
      embeds.push_back(std::move(t));
    }
    const auto pts = project_embeddings_2d(words, embeds);
    std::ostringstream os;
    os << std::setprecision(17);
    for (const auto& pt : pts)
      os << pt.word << '\t' << pt.x << '\t' << pt.y << '\n';
    write_file(p.out, os.str());
    if (!p.svg.empty()) write_file(p.svg, svg_scatter(pts));
  });

  // ---- gradcheck ----------------------------------------------------------
  auto* gc = app.add_subcommand("gradcheck",
                                "finite-difference check of all gradients");
  struct {
    std::uint64_t seed = 1;
    std::size_t seeds = 5;
    double h = 1e-5, tol = 1e-4;
  } gcf;
  gc->add_option("--seed", gcf.seed, "base seed");
  gc->add_option("--num-seeds", gcf.seeds, "seeds per model/variant");
  gc->add_option("--step", gcf.h, "finite-difference step");
  gc->add_option("--tol", gcf.tol, "relative-error tolerance");
  gc->callback([&gcf] {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < gcf.seeds; ++i) seeds.push_back(gcf.seed + i);
    const auto checks = run_model_grad_checks(seeds, gcf.h, gcf.tol);
    std::cout << "# seed=" << gcf.seed << '\n' << format_grad_checks(checks);
    if (!all_grad_checks_pass(checks))
      throw std::runtime_error("gradient check failed");
  });

  // ---- sweeps -------------------------------------------------------------
  auto* sn = app.add_subcommand("sweep-negatives",
                                "WER vs negatives-per-positive");
  TrainFlags snf;
  std::string sn_test, sn_out;
  std::vector<std::size_t> sn_values{1, 5, 10, 25, 50};
  add_train_flags(sn, snf, /*with_arch=*/false);
  sn->add_option("--test", sn_test, "test corpus file")->required();
  sn->add_option("--out", sn_out, "output CSV")->required();
  sn->add_option("--values", sn_values, "negative counts to sweep")
      ->delimiter(',');
  sn->callback([&snf, &sn_test, &sn_out, &sn_values] {
    const LoadedData data = load_train_data(snf);
    const Corpus test =
        parse_corpus(read_file(sn_test), data.inv, data.lex);
    std::ostringstream os;
    os << "# seed=" << snf.cfg.seed << "\nnegatives,test_wer1,test_wer2\n";
    for (std::size_t negs : sn_values) {
      TrainConfig cfg = snf.cfg;
      cfg.negatives_per_positive = negs;
      auto [model, report] = train_rank(snf, data, cfg);
      auto scorer = make_rank_scorer(
          std::shared_ptr<const RankModel>(std::shared_ptr<void>(), &model));
      const double w1 = wer_at_k(test, data.lex, scorer, 1);
      const double w2 = wer_at_k(test, data.lex, scorer, 2);
      os << negs << ',' << w1 << ',' << w2 << '\n';
      std::cout << "negatives=" << negs << " test WER@1 " << w1 << "% WER@2 "
                << w2 << "%\n";
    }
    write_file(sn_out, os.str());
  });

  auto* sd = app.add_subcommand("sweep-dim", "WER vs embedding size");
  TrainFlags sdf;
  std::string sd_test, sd_out;
  std::vector<std::size_t> sd_values{40, 80, 120, 150};
  add_train_flags(sd, sdf, /*with_arch=*/false);
  sd->add_option("--test", sd_test, "test corpus file")->required();
  sd->add_option("--out", sd_out, "output CSV")->required();
  sd->add_option("--dims", sd_values, "embedding sizes to sweep")->delimiter(',');
  sd->callback([&sdf, &sd_test, &sd_out, &sd_values] {
    const LoadedData data = load_train_data(sdf);
    const Corpus test = parse_corpus(read_file(sd_test), data.inv, data.lex);
    std::ostringstream os;
    os << "# seed=" << sdf.cfg.seed
       << "\ndim,dev_wer1,dev_wer2,test_wer1,test_wer2\n";
    for (std::size_t dim : sd_values) {
      TrainFlags flags = sdf;
      flags.embed_dim = dim;
      auto [model, report] = train_rank(flags, data, flags.cfg);
      auto scorer = make_rank_scorer(
          std::shared_ptr<const RankModel>(std::shared_ptr<void>(), &model));
      const auto& best = report.epochs[report.selected_epoch];
      const double w1 = wer_at_k(test, data.lex, scorer, 1);
      const double w2 = wer_at_k(test, data.lex, scorer, 2);
      os << dim << ',' << best.dev_wer1 << ',' << best.dev_wer2 << ',' << w1
         << ',' << w2 << '\n';
      std::cout << "dim=" << dim << " test WER@1 " << w1 << "% WER@2 " << w2
                << "%\n";
    }
    write_file(sd_out, os.str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
}
