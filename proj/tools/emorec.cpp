// Command-line front end over the library and the HTTP gateway.

#include "emorec/catalog.hpp"
#include "emorec/classifier.hpp"
#include "emorec/config.hpp"
#include "emorec/http.hpp"
#include "emorec/ledger.hpp"
#include "emorec/recommender.hpp"
#include "emorec/service.hpp"
#include "emorec/synthetic.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

using namespace emorec;

namespace {

struct TrainArgs {
  std::string corpus;
  std::string images;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t epochs = 20;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  double test_fraction = 0.2;
  double threshold = kDefaultMoodThreshold;
};

TrainConfig train_config(const TrainArgs& a) {
  TrainConfig c;
  c.seed = a.seed;
  c.epochs = a.epochs;
  c.learning_rate = a.learning_rate;
  c.batch_size = a.batch_size;
  return c;
}

void print_loss(const std::vector<double>& history) {
  for (std::size_t i = 0; i < history.size(); ++i) std::printf("epoch %zu loss %.6f\n", i + 1, history[i]);
}

int train_lyrics(const TrainArgs& a) {
  auto songs = read_songs_jsonl(a.corpus);
  auto [train, test] = split_train_test(std::move(songs), a.seed, 1.0 - a.test_fraction);
  const auto clf = train_lyric_classifier(train, train_config(a));
  print_loss(clf.loss_history());
  clf.save(a.out);
  if (!test.empty()) std::cout << format_metrics(evaluate(clf, label_songs(test, clf.pipeline())));
  std::cout << "saved " << a.out << "\n";
  return 0;
}

int train_images(const TrainArgs& a) {
  auto images = load_image_dataset(a.images);
  auto [train, test] = split_train_test(std::move(images), a.seed, 1.0 - a.test_fraction);
  const auto clf = train_mood_image_classifier(train, train_config(a), a.threshold);
  print_loss(clf.loss_history());
  clf.save(a.out);
  if (!test.empty()) std::cout << format_metrics(evaluate(clf, test));
  std::cout << "saved " << a.out << "\n";
  return 0;
}

/// "happy" or "happy=0.7,sad=0.3".
EmotionDistribution parse_mood_arg(const std::string& text) {
  EmotionVector v = EmotionVector::Zero();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    const auto name = item.substr(0, eq);
    const auto label = try_parse_emotion(name);
    if (!label) throw Error(Errc::UnknownLabel, "unknown emotion '" + name + "'");
    v[static_cast<int>(*label)] += eq == std::string::npos ? 1.0 : std::stod(item.substr(eq + 1));
  }
  return EmotionDistribution::normalized(v);
}

std::unique_ptr<Ledger> open_chain(const std::string& path) {
  if (path.empty()) return std::make_unique<Ledger>();
  return std::make_unique<Ledger>(std::make_unique<JsonLinesStorage>(path));
}

ServiceConfig config_or_default(const std::string& path) {
  return path.empty() ? ServiceConfig{} : load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion-aware music recommendation toolkit"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier and save a checkpoint");
  auto* train_src = train_cmd->add_option_group("source");
  train_src->add_option("--corpus", train.corpus, "Songs JSONL; trains the lyric classifier")->check(CLI::ExistingFile);
  train_src->add_option("--images", train.images, "Directory of <label>_<n>.pgm; trains the mood image classifier")
      ->check(CLI::ExistingDirectory);
  train_src->require_option(1);
  train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--epochs", train.epochs);
  train_cmd->add_option("--lr", train.learning_rate);
  train_cmd->add_option("--batch", train.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--test-fraction", train.test_fraction, "Held out and scored after training")
      ->check(CLI::Range(0.0, 0.9));
  train_cmd->add_option("--threshold", train.threshold, "Mood report threshold (image model)")->check(CLI::Range(0.0, 1.0));

  std::string eval_corpus, eval_images, eval_ckpt;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on a labelled set");
  auto* eval_src = eval_cmd->add_option_group("source");
  eval_src->add_option("--corpus", eval_corpus, "Songs JSONL")->check(CLI::ExistingFile);
  eval_src->add_option("--images", eval_images, "Directory of PGMs")->check(CLI::ExistingDirectory);
  eval_src->require_option(1);
  eval_cmd->add_option("--ckpt", eval_ckpt)->required()->check(CLI::ExistingFile);

  std::string ingest_catalog, ingest_ckpt, ingest_chain, ingest_config, ingest_actor = "curator";
  auto* ingest_cmd = app.add_subcommand("ingest", "Record catalog metadata and emotion tags on the ledger");
  ingest_cmd->add_option("--catalog", ingest_catalog, "Songs JSONL (default: the config's catalog_path)")
      ->check(CLI::ExistingFile);
  ingest_cmd->add_option("--ckpt", ingest_ckpt, "Lyric checkpoint for predicted tags")->check(CLI::ExistingFile);
  auto* ingest_dest = ingest_cmd->add_option_group("chain");
  ingest_dest->add_option("--chain", ingest_chain);
  ingest_dest->add_option("--config", ingest_config)->check(CLI::ExistingFile);
  ingest_dest->require_option(1);
  ingest_cmd->add_option("--actor", ingest_actor);

  std::string rec_config, rec_catalog, rec_chain, rec_ckpt, rec_user, rec_mood;
  std::vector<double> rec_weights;
  std::optional<double> rec_lambda;
  std::size_t rec_k = 10;
  auto* rec_cmd = app.add_subcommand("recommend", "Rank the catalog for one user and mood");
  auto* rec_src = rec_cmd->add_option_group("catalog");
  rec_src->add_option("--config", rec_config, "Service config; supplies catalog, chain, checkpoint and weights")
      ->check(CLI::ExistingFile);
  rec_src->add_option("--catalog", rec_catalog, "Songs JSONL")->check(CLI::ExistingFile);
  rec_src->require_option(1);
  rec_cmd->add_option("--chain", rec_chain, "Chain file with feedback history")->check(CLI::ExistingFile);
  rec_cmd->add_option("--ckpt", rec_ckpt, "Lyric checkpoint for predicted tags")->check(CLI::ExistingFile);
  rec_cmd->add_option("--weights", rec_weights, "emotion,collaborative,content")->delimiter(',')->expected(3);
  rec_cmd->add_option("--lambda", rec_lambda, "Curated tag weight in the song profile")->check(CLI::Range(0.0, 1.0));
  rec_cmd->add_option("--user", rec_user)->required();
  rec_cmd->add_option("--emotion", rec_mood, "Label or label=weight list")->required();
  rec_cmd->add_option("--k", rec_k)->check(CLI::Range(1, 100));

  std::string serve_config;
  std::optional<int> serve_port;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP gateway");
  serve_cmd->add_option("--config", serve_config)->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve_port)->check(CLI::Range(0, 65535));

  std::string chain_path, chain_config, balance_user;
  auto* ledger_cmd = app.add_subcommand("ledger", "Inspect a chain file");
  ledger_cmd->require_subcommand(1);
  auto* verify_cmd = ledger_cmd->add_subcommand("verify", "Check every hash link");
  auto* balance_cmd = ledger_cmd->add_subcommand("balance", "Token balance of one user");
  balance_cmd->add_option("--user", balance_user)->required();
  auto* requests_cmd = ledger_cmd->add_subcommand("requests", "Request records per UTC day");
  for (auto* c : {verify_cmd, balance_cmd, requests_cmd}) {
    auto* g = c->add_option_group("chain");
    g->add_option("--chain", chain_path)->check(CLI::ExistingFile);
    g->add_option("--config", chain_config)->check(CLI::ExistingFile);
    g->require_option(1);
  }

  std::size_t synth_per_class = 40;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic training data");
  synth_cmd->require_subcommand(1);
  auto* synth_lyr = synth_cmd->add_subcommand("lyrics", "Keyword lyric corpus as songs JSONL");
  auto* synth_img = synth_cmd->add_subcommand("glyphs", "Noisy 48x48 mood glyphs as PGM files");
  for (auto* c : {synth_lyr, synth_img}) {
    c->add_option("--per-class", synth_per_class)->check(CLI::PositiveNumber);
    c->add_option("--seed", synth_seed);
    c->add_option("--out", synth_out)->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) return train.corpus.empty() ? train_images(train) : train_lyrics(train);

    if (eval_cmd->parsed()) {
      if (!eval_corpus.empty()) {
        const auto clf = LyricClassifier::load(eval_ckpt);
        const auto songs = read_songs_jsonl(eval_corpus);
        std::cout << format_metrics(evaluate(clf, label_songs(songs, clf.pipeline())));
      } else {
        const auto clf = MoodImageClassifier::load(eval_ckpt);
        std::cout << format_metrics(evaluate(clf, load_image_dataset(eval_images)));
      }
      return 0;
    }

    if (ingest_cmd->parsed()) {
      if (!ingest_config.empty()) {
        const auto cfg = load_config(ingest_config);
        ingest_chain = cfg.chain_path.string();
        if (ingest_catalog.empty()) ingest_catalog = cfg.catalog_path.string();
        if (ingest_ckpt.empty()) ingest_ckpt = cfg.checkpoint_path.string();
      }
      if (ingest_catalog.empty() || ingest_chain.empty()) {
        std::cerr << "error: ingest needs a catalog and a chain path\n";
        return 2;
      }
      std::optional<LyricClassifier> clf;
      if (!ingest_ckpt.empty()) clf = LyricClassifier::load(ingest_ckpt);
      const auto songs = read_songs_jsonl(ingest_catalog);
      const auto catalog = build_catalog(songs, clf ? &*clf : nullptr);
      Ledger ledger(std::make_unique<JsonLinesStorage>(ingest_chain));
      const auto now = ledger.now();
      for (const auto& s : catalog) {
        std::vector<LedgerRecord> records;
        records.push_back({RecordKind::SongMetadata, {{"song_id", s.song_id}, {"title", s.title}, {"artist", s.artist}},
                           ingest_actor, now});
        nlohmann::json tags{{"song_id", s.song_id}};
        if (s.curated_tags) tags["tags"] = emotion_tags_to_json(*s.curated_tags);
        if (s.predicted_tags) {
          tags["predicted"] = emotion_tags_to_json(*s.predicted_tags);
          if (!s.curated_tags) tags["tags"] = tags["predicted"];
        }
        records.push_back({RecordKind::EmotionTag, std::move(tags), ingest_actor, now});
        ledger.append(std::move(records));
      }
      std::cout << "ingested " << catalog.size() << " songs; chain height " << ledger.size() << "\n";
      return 0;
    }

    if (rec_cmd->parsed()) {
      auto cfg = config_or_default(rec_config);
      if (!rec_catalog.empty()) cfg.catalog_path = rec_catalog;
      if (!rec_chain.empty()) cfg.chain_path = rec_chain;
      if (!rec_ckpt.empty()) cfg.checkpoint_path = rec_ckpt;
      if (!rec_weights.empty()) cfg.weights = {rec_weights[0], rec_weights[1], rec_weights[2]};
      if (rec_lambda) cfg.blend_lambda = *rec_lambda;
      std::optional<EmotionDistribution> mood;
      try {
        cfg.validate();
        mood = parse_mood_arg(rec_mood);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
      std::optional<LyricClassifier> clf;
      if (!cfg.checkpoint_path.empty()) clf = LyricClassifier::load(cfg.checkpoint_path);
      const auto catalog = load_catalog(cfg.catalog_path, clf ? &*clf : nullptr);
      InteractionStore store;
      if (!cfg.chain_path.empty() && std::filesystem::exists(cfg.chain_path)) {
        const auto ledger = open_chain(cfg.chain_path.string());
        for (const auto& r : ledger->query(RecordKind::Preference)) {
          store.append({r.payload.at("user_id").get<std::string>(), r.payload.at("song_id").get<std::string>(),
                        parse_feedback(r.payload.at("feedback").get<std::string>()), r.timestamp});
        }
      }
      RecommendOptions opts;
      opts.k = rec_k;
      opts.weights = cfg.weights;
      opts.lambda = cfg.blend_lambda;
      const auto recs = recommend(rec_user, *mood, catalog, store, opts);
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        std::printf("%2zu  %-12s %.4f  (emotion %.4f, cf %.4f, content %.4f)\n", i + 1, r.song_id.c_str(), r.score,
                    r.components.emotion_affinity, r.components.cf_score, r.components.content_score);
      }
      return 0;
    }

    if (serve_cmd->parsed()) {
      auto cfg = load_config(serve_config);
      if (serve_port) cfg.port = *serve_port;
      auto service = make_service(cfg);
      auto server = make_http_server(*service, cfg.static_dir);
      std::cerr << "listening on 0.0.0.0:" << cfg.port << "\n";
      if (!server->listen("0.0.0.0", cfg.port)) {
        std::cerr << "error: cannot listen on port " << cfg.port << "\n";
        return 1;
      }
      return 0;
    }

    if (ledger_cmd->parsed()) {
      const std::string path = chain_config.empty() ? chain_path : config_or_default(chain_config).chain_path.string();
      if (path.empty()) {
        std::cerr << "error: the config has no chain_path\n";
        return 2;
      }
      if (verify_cmd->parsed()) {
        const auto v = verify_chain_file(path);
        if (v.ok) {
          std::cout << "ok\n";
          return 0;
        }
        std::cout << "corrupt at block " << v.first_bad_index.value_or(0) << ": " << v.reason << "\n";
        return 1;
      }
      const auto ledger = open_chain(path);
      if (balance_cmd->parsed()) {
        std::cout << ledger->balance(balance_user) << "\n";
      } else {
        for (const auto& [day, n] : ledger->requests_per_day()) std::cout << day << " " << n << "\n";
      }
      return 0;
    }

    if (synth_lyr->parsed()) {
      write_songs_jsonl(synth_out, synthetic::lyric_corpus(synth_per_class, synth_seed));
      return 0;
    }
    if (synth_img->parsed()) {
      std::filesystem::create_directories(synth_out);
      save_image_dataset(synth_out, synthetic::glyph_dataset(synth_per_class, synth_seed));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
