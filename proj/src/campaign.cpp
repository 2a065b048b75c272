#include "phishsim/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_set>

#include "phishsim/bot_agent.hpp"
#include "phishsim/detection.hpp"
#include "phishsim/io.hpp"
#include "phishsim/profiler.hpp"
#include "phishsim/victim_model.hpp"

namespace phishsim {

namespace fs = std::filesystem;

namespace {

// Everyday words for organic posts.
const std::vector<std::string> kFiller = {
    "hoje",    "agora",    "ainda",   "muito",   "pouco",   "sempre",  "nunca",   "talvez",
    "gente",   "amigos",   "semana",  "manhã",   "tarde",   "noite",   "cidade",  "casa",
    "trabalho", "escola",  "café",    "almoço",  "jantar",  "chuva",   "sol",     "calor",
    "frio",    "rua",      "ônibus",  "metrô",   "trânsito", "fila",   "mercado", "feira",
    "vizinho", "família",  "mãe",     "pai",     "irmão",   "prima",   "bom",     "ruim",
    "legal",   "demais",   "cansado", "feliz",   "triste",  "sério",   "verdade", "mentira",
    "pensando", "vendo",   "lendo",   "ouvindo", "falando", "esperando", "achei", "vi",
    "acho",    "sei",      "quero",   "preciso", "vamos",   "bora",    "olha",    "nossa",
    "então",   "porque",   "quando",  "onde",    "como",    "quem",    "isso",    "aquilo",
    "mais",    "menos",    "tudo",    "nada",    "todo",    "dia",     "ano",     "mês"};

std::string bot_handle(Theme theme, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tw_bot_%.3s_%03zu", std::string(to_string(theme)).c_str(),
                index + 1);
  return buf;
}

std::string actor_label(const ScenarioConfig& cfg, std::size_t i) {
  const Theme theme = cfg.bots[i].theme;
  const auto same = std::count_if(cfg.bots.begin(), cfg.bots.end(),
                                  [&](const BotConfig& b) { return b.theme == theme; });
  std::string label = "bot/" + std::string(to_string(theme));
  if (same > 1) label += "/" + std::to_string(i);
  return label;
}

SimTime exponential_gap(Rng& rng, double per_hour) {
  const double u = uniform01(rng);
  const double gap = -std::log1p(-u) * static_cast<double>(kSecondsPerHour) / per_hour;
  return std::max<SimTime>(1, static_cast<SimTime>(std::ceil(gap)));
}

std::string organic_text(Rng& rng, const std::vector<std::string>& keywords,
                         double keyword_probability) {
  const std::size_t words = 6 + static_cast<std::size_t>(rng() % 9);
  std::vector<std::string> parts;
  parts.reserve(words);
  for (std::size_t i = 0; i < words; ++i) parts.push_back(kFiller[rng() % kFiller.size()]);
  if (!keywords.empty() && uniform01(rng) < keyword_probability)
    parts[rng() % words] = keywords[rng() % keywords.size()];
  std::string text;
  for (const auto& p : parts) {
    if (!text.empty()) text.push_back(' ');
    text += p;
  }
  return text;
}

std::vector<HistogramBin> histogram_of(const Platform& platform,
                                       const std::map<Theme, std::vector<std::string>>& active,
                                       std::size_t bins) {
  std::vector<HistogramBin> out;
  for (const auto& [theme, handles] : active) {
    std::vector<std::int64_t> f, o;
    for (const auto& h : handles) {
      const AccountProfile& a = platform.account(h);
      f.push_back(a.followers_count);
      o.push_back(a.following_count);
    }
    std::vector<double> ranks(f.size());
    follower_rank_batch(f, o, ranks);
    std::vector<std::uint64_t> counts(bins, 0);
    for (double r : ranks)
      ++counts[std::min(bins - 1, static_cast<std::size_t>(r * static_cast<double>(bins)))];
    for (std::size_t i = 0; i < bins; ++i)
      out.push_back({theme, static_cast<double>(i) / bins, static_cast<double>(i + 1) / bins,
                     counts[i]});
  }
  return out;
}

struct Run {
  explicit Run(const ScenarioConfig& c)
      : cfg(c),
        attack_start(c.attack_start()),
        start(c.attack_start() - c.warmup_seconds()),
        end(c.attack_start() + c.duration_seconds()),
        keywords(load_keywords(c)),
        scheduler(start, 1),
        platform(scheduler, keywords),
        registry(PseudonymRegistry::run_secret(c.seed)),
        engine(c.detection, &platform) {}

  const ScenarioConfig& cfg;
  const SimTime attack_start;
  const SimTime start;
  const SimTime end;
  std::map<Theme, std::vector<std::string>> keywords;
  EventScheduler scheduler;
  Platform platform;
  PseudonymRegistry registry;
  DetectionEngine engine;
  CampaignResult result;
  bool organic_stopped = false;
  std::map<Theme, Rng> organic_rngs;

  void log(SimTime t, std::string actor, std::string event, nlohmann::json payload) {
    result.log.push_back({t, std::move(actor), std::move(event), std::move(payload)});
  }

  void setup_population() {
    PopulationSpec spec = cfg.population;
    spec.reference_time = start;
    for (AccountProfile& a : generate_population(spec, cfg.seed)) {
      result.handles.push_back(a.handle);
      platform.add_account(std::move(a));
    }
    platform.set_retain_timeline(false);
    platform.set_observer(&engine);
  }

  void schedule_organic(Theme theme, SimTime from) {
    auto rate = cfg.organic.tweets_per_hour.find(theme);
    if (rate == cfg.organic.tweets_per_hour.end() || rate->second <= 0.0) return;
    if (platform.accounts_with_theme(theme).empty()) return;
    auto it = organic_rngs.find(theme);
    if (it == organic_rngs.end())
      it = organic_rngs.emplace(theme, make_rng(cfg.seed, "organic:" + std::string(to_string(theme)))).first;
    Rng& rng = it->second;
    const SimTime at = from + exponential_gap(rng, rate->second);
    if (at >= end) return;
    scheduler.schedule(at, [this, theme](SimTime now) { organic_post(theme, now); }, "organic");
  }

  void organic_post(Theme theme, SimTime now) {
    if (organic_stopped) return;
    Rng& rng = organic_rngs.at(theme);
    const auto& pool = platform.accounts_with_theme(theme);
    const AccountProfile& author = platform.accounts()[pool[rng() % pool.size()]];
    std::string text = organic_text(rng, keywords[theme], cfg.organic.keyword_probability);
    if (!engine.is_banned(author.handle)) {
      platform.post_tweet(author.handle, std::move(text), {}, std::nullopt, theme);
      ++result.organic_posts;
    }
    schedule_organic(theme, now);
  }

  void run_clock() {
    const SimTime step = std::max<SimTime>(1, cfg.bot_tick_seconds);
    while (scheduler.now() < end) scheduler.advance_clock(std::min(step, end - scheduler.now()));
    organic_stopped = true;
    while (auto next = scheduler.next_event_time())
      scheduler.advance_clock(std::max<SimTime>(1, *next - scheduler.now()));
  }
};

void run_capture(Run& run) {
  const ScenarioConfig& cfg = run.cfg;
  std::map<Theme, std::vector<std::string>> active;
  std::map<Theme, std::unordered_set<std::string>> active_seen;
  std::vector<Platform::Subscription> subs;
  for (const auto& [theme, kws] : run.keywords) {
    if (kws.empty()) continue;
    subs.push_back(run.platform.subscribe(kws, [&run, &active, &active_seen](const TweetRecord& t) {
      TweetRecord copy = t;
      copy.author = run.registry.pseudonymize(t.author);
      for (auto& m : copy.mentions) m = run.registry.pseudonymize(m);
      run.result.capture.push_back(std::move(copy));
      if (active_seen[t.theme].insert(t.author).second) active[t.theme].push_back(t.author);
    }));
  }
  for (Theme t : kAllThemes) run.schedule_organic(t, run.start);
  run.run_clock();
  for (auto s : subs) run.platform.unsubscribe(s);
  run.result.histogram = histogram_of(run.platform, active, cfg.histogram_bins);
}

void run_attacks(Run& run) {
  const ScenarioConfig& cfg = run.cfg;
  const std::uint64_t seed = cfg.seed;
  const HeadlineCorpus corpus = HeadlineCorpus::load(cfg.headlines_file);
  const std::vector<std::string> benign = load_benign_corpus(cfg.benign_file);
  LandingService service(LandingContent::from_document(cfg.project_document));

  std::unique_ptr<LandingHttpServer> server;
  std::unique_ptr<LandingClient> client;
  if (cfg.transport == Transport::http) {
    server = std::make_unique<LandingHttpServer>(service);
    const int port = server->start();
    client = std::make_unique<HttpLandingClient>("127.0.0.1", port);
  } else {
    client = std::make_unique<InProcessLandingClient>(service);
  }
  UrlShortener shortener(seed);

  struct Bot {
    std::unique_ptr<BotAgent> agent;
    std::unique_ptr<FlowBuffer> buffer;
    std::unique_ptr<TargetSampler> sampler;
    std::string actor;
  };
  std::vector<Bot> bots;
  std::unordered_set<std::string> seen;
  std::map<std::string, std::string> actor_of;
  RunMetadata meta;
  meta.scenario = cfg.name;
  meta.seed = seed;
  meta.duration_hours = cfg.duration_hours;
  meta.attack_start = run.attack_start;

  for (std::size_t i = 0; i < cfg.bots.size(); ++i) {
    const BotConfig& bc = cfg.bots[i];
    AccountProfile profile;
    profile.handle = bot_handle(bc.theme, i);
    profile.followers_count = 120;
    profile.following_count = 300;
    profile.post_count = 0;
    profile.created_at = run.attack_start - 90 * kSecondsPerDay;
    profile.theme_affinity = bc.theme;
    profile.is_bot = true;
    run.result.handles.push_back(profile.handle);
    run.platform.add_account(profile);

    Bot bot;
    bot.actor = actor_label(cfg, i);
    bot.agent = std::make_unique<BotAgent>(profile.handle, bc.theme, bc.policy, bc.quota,
                                           run.attack_start, derive_seed(seed, bot.actor));
    bot.buffer = std::make_unique<FlowBuffer>(cfg.buffer_capacity);
    run.platform.stream_by_keywords(run.keywords.at(bc.theme), *bot.buffer);
    SamplingPolicy sp;
    sp.skip_fraction = bc.policy.skip_fraction;
    sp.banding = RankBanding::equal_width(cfg.bands);
    sp.reference_time = run.attack_start;
    bot.sampler = std::make_unique<TargetSampler>(run.platform, run.registry, sp,
                                                  derive_seed(seed, "sampler:" + bot.actor), &seen);
    actor_of[profile.handle] = bot.actor;
    BotSummary summary;
    summary.actor = bot.actor;
    summary.theme = bc.theme;
    summary.policy = bc.policy.version;
    summary.quota = bc.quota;
    meta.bots.push_back(std::move(summary));
    bots.push_back(std::move(bot));
  }

  run.engine.on_ban([&run, &actor_of](const BanEvent& ban) {
    auto it = actor_of.find(ban.handle);
    run.log(ban.banned_at, "platform", "ban",
            {{"handle_pseudonym", run.registry.pseudonymize(ban.handle)},
             {"actor", it != actor_of.end() ? it->second : std::string("account")},
             {"banned_at", ban.banned_at},
             {"triggering_rule", std::string(rule_code(ban.trigger))},
             {"score", ban.score}});
  });

  std::uint64_t form_counter = 0;
  auto landing_log = [&run](SimTime t, const std::string& pseudonym, VisitKind kind,
                            const LandingResponse& resp) {
    run.log(t, "landing", "landing_request",
            {{"pseudonym", pseudonym}, {"kind", std::string(to_string(kind))}, {"status", resp.status}});
  };

  auto respond = [&](const std::string& link, const std::string& pseudonym,
                     const std::string& target_handle, const std::string& bot_handle,
                     BehaviorOutcome outcome, SimTime now) {
    run.log(now, "victim", "victim_response",
            {{"pseudonym", pseudonym}, {"outcome", std::string(to_string(outcome.kind))},
             {"doc_download", outcome.doc_download}});
    if (outcome.kind == Outcome::complain) {
      run.engine.register_complaint(target_handle, bot_handle, now);
      return;
    }
    if (!outcome.visited()) return;
    std::string url = link;
    if (shortener.is_short(link)) url = shortener.expand(link).value_or("");
    const std::string id = pseudonym_from_url(url).value_or("");
    landing_log(now, id, VisitKind::page_view, client->visit(id, now));
    if (outcome.kind == Outcome::visit_register) {
      const std::string n = std::to_string(++form_counter);
      landing_log(now, id, VisitKind::register_access,
                  client->register_access(id, "Visitante " + n, "visitante" + n + "@example.invalid",
                                          "+55 61 90000-" + n, now));
    } else if (outcome.plain_access) {
      landing_log(now, id, VisitKind::plain_access, client->plain_access(id, now));
    }
    if (outcome.doc_download) landing_log(now, id, VisitKind::project_doc, client->project_doc(id, now));
  };

  std::function<void(SimTime)> tick = [&](SimTime now) {
    bool any_active = false;
    for (Bot& bot : bots) {
      BotAgent& agent = *bot.agent;
      if (agent.halted()) continue;
      if (run.engine.is_banned(agent.handle())) {
        agent.halt();
        run.log(now, bot.actor, "bot_halted", {{"reason", "banned"}});
        continue;
      }
      any_active = true;
      if (agent.wants_targets() && agent.pending().empty()) {
        for (auto& t : bot.sampler->sample(*bot.buffer)) agent.pending().push_back(std::move(t));
      }
      const BotAction action = agent.next_action(now, agent.pending().size());
      if (action == BotAction::send_attack) {
        PendingTarget target = std::move(agent.pending().front());
        agent.pending().pop_front();
        const BaitDraft draft = craft_bait(target.record, target.handle, agent.policy(), corpus,
                                           agent.attacks_sent(), cfg.landing_base_url, &shortener);
        service.register_pseudonym(target.record.pseudonym, target.record.theme);
        run.platform.post_tweet(agent.handle(), draft.text, draft.mentions, draft.link, agent.theme());
        agent.record_attack();
        target.record.stimulated_at = now;
        run.log(now, bot.actor, "attack_sent",
                {{"theme", std::string(to_string(agent.theme()))},
                 {"pseudonym", target.record.pseudonym},
                 {"link", draft.link},
                 {"headline_index", draft.headline_index},
                 {"variant_index", draft.variant_index},
                 {"sequence", agent.attacks_sent()}});
        const BehaviorOutcome outcome = decide_response(target.record, cfg.victim, seed);
        run.scheduler.schedule(
            now + outcome.delay,
            [&, link = draft.link, pseudonym = target.record.pseudonym, th = target.handle,
             bh = agent.handle(), outcome](SimTime t) { respond(link, pseudonym, th, bh, outcome, t); },
            "victim");
        run.result.targets.push_back(std::move(target.record));
        if (agent.quota_reached()) run.log(now, bot.actor, "quota_reached", {{"attacks", agent.attacks_sent()}});
      } else if (action == BotAction::send_legit) {
        run.platform.post_tweet(agent.handle(), agent.next_legit_text(benign), {}, std::nullopt,
                                agent.theme());
        agent.record_legit();
        run.log(now, bot.actor, "legit_sent", {{"theme", std::string(to_string(agent.theme()))}});
      }
      if (run.engine.is_banned(agent.handle())) {
        agent.halt();
        run.log(now, bot.actor, "bot_halted", {{"reason", "banned"}});
      }
    }
    if (!any_active || std::all_of(bots.begin(), bots.end(), [](const Bot& b) { return b.agent->halted(); })) {
      run.organic_stopped = true;
      return;
    }
    if (now + cfg.bot_tick_seconds < run.end)
      run.scheduler.schedule(now + cfg.bot_tick_seconds, tick, "bot_tick");
  };

  for (Theme t : kAllThemes) run.schedule_organic(t, run.start);
  run.scheduler.schedule(run.attack_start, tick, "bot_tick");
  run.run_clock();
  client.reset();  // closes the keep-alive connection so stop() does not wait it out
  if (server) server->stop();

  CampaignResult& res = run.result;
  res.ledger = service.snapshot();
  if (auto v = res.ledger.invariant_violation(); !v.empty())
    throw ContractViolation("ledger invariant broken: " + v);

  std::optional<RegressionFit> fit;
  std::string note;
  if (res.targets.size() < kFeatureCount + 1) {
    note = res.targets.empty() ? "no stimuli" : "too few stimulated targets for a fit";
  } else {
    std::vector<LabeledTarget> rows;
    rows.reserve(res.targets.size());
    for (const TargetRecord& t : res.targets) {
      auto it = res.ledger.per_pseudonym.find(t.pseudonym);
      rows.push_back({t, it != res.ledger.per_pseudonym.end() && it->second.visit_count > 0});
    }
    try {
      fit = fit_logistic(build_features(rows));
    } catch (const InvalidArgument& e) {
      note = e.what();
    }
  }
  res.report = summarize_report(res.log, res.ledger, std::move(fit), std::move(meta), note);
}

}  // namespace

CampaignResult run_campaign(const ScenarioConfig& config) {
  Run run(config);
  run.result.config = config;
  run.setup_population();
  if (config.mode == RunMode::capture) {
    run_capture(run);
  } else {
    run_attacks(run);
  }
  return std::move(run.result);
}

std::vector<std::string> artifact_names(RunMode mode) {
  if (mode == RunMode::capture) return {"capture.jsonl", "followerrank_histogram.csv", "config.yaml"};
  return {"run_log.jsonl", "ledger.json", "targets.csv", "report.json", "config.yaml"};
}

void write_artifacts(const CampaignResult& r, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  io::write_file(out_dir / "config.yaml", to_yaml(r.config));
  if (r.config.mode == RunMode::capture) {
    std::ostringstream cap;
    write_capture(cap, r.capture);
    io::write_file(out_dir / "capture.jsonl", cap.str());
    std::ostringstream hist;
    hist << "theme,bin_lower,bin_upper,accounts\n";
    for (const HistogramBin& b : r.histogram)
      hist << to_string(b.theme) << ',' << io::format_double(b.lower) << ','
           << io::format_double(b.upper) << ',' << b.accounts << '\n';
    io::write_file(out_dir / "followerrank_histogram.csv", hist.str());
    return;
  }
  std::ostringstream log;
  write_run_log(log, r.log);
  io::write_file(out_dir / "run_log.jsonl", log.str());
  io::write_file(out_dir / "ledger.json", to_json(r.ledger).dump(2) + "\n");
  std::ostringstream targets;
  write_targets_csv(targets, r.targets);
  io::write_file(out_dir / "targets.csv", targets.str());
  io::write_file(out_dir / "report.json", to_json(r.report).dump(2) + "\n");
}

std::string summary_text(const CampaignResult& r) {
  std::ostringstream s;
  const ScenarioConfig& c = r.config;
  s << "scenario " << c.name << "  seed " << c.seed << "  duration " << c.duration_hours << " h\n";
  if (c.mode == RunMode::capture) {
    s << "capture: " << r.capture.size() << " keyword tweets from " << r.organic_posts
      << " organic posts\n";
    std::map<Theme, std::uint64_t> active;
    for (const auto& b : r.histogram) active[b.theme] += b.accounts;
    for (const auto& [t, n] : active) s << "  " << to_string(t) << ": " << n << " active accounts\n";
    return s.str();
  }
  const CampaignReport& rep = r.report;
  for (const BotSummary& b : rep.meta.bots) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-20s %s  attacks %4zu  legit %4zu  ", b.actor.c_str(),
                  std::string(to_string(b.policy)).c_str(), b.attacks, b.legit);
    s << line;
    if (b.hours_to_ban) {
      std::snprintf(line, sizeof line, "banned after %.2f h (%s)\n", *b.hours_to_ban,
                    b.ban_rule->c_str());
      s << line;
    } else {
      s << "not banned\n";
    }
  }
  s << "stimuli " << rep.total_stimuli << ":";
  for (const auto& [t, n] : rep.stimuli) s << ' ' << to_string(t) << '=' << n;
  s << "\nhits:";
  for (const auto& [t, n] : rep.hits) s << ' ' << to_string(t) << '=' << n;
  s << "\nledger: unique_visitors=" << r.ledger.unique_visitors
    << " total_visits=" << r.ledger.total_visits << " news_visits=" << r.ledger.news_visits
    << " registered=" << r.ledger.registered_access
    << " project_downloads=" << r.ledger.project_downloads << '\n';
  if (rep.fit) {
    s << "fit: " << (rep.fit->converged ? "converged" : "not converged") << " in "
      << rep.fit->iterations << " iterations";
    for (std::size_t i = 0; i < rep.fit->coefficients.size(); ++i) {
      const auto& n = rep.fit->column_names[i];
      if (n == "theme_politics" || n == "age_years") {
        char line[96];
        std::snprintf(line, sizeof line, "  %s=%+.3f (z=%+.2f)", n.c_str(), rep.fit->coefficients[i],
                      rep.fit->z_scores[i]);
        s << line;
      }
    }
    s << '\n';
  } else if (!rep.fit_note.empty()) {
    s << "fit: " << rep.fit_note << '\n';
  }
  return s.str();
}

}  // namespace phishsim
