#include "increvise/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace increvise {

namespace {

std::vector<std::string> tokenize(const std::string& form) {
  std::vector<std::string> out;
  std::istringstream in(form);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// Longest paradigm key contained in `features`, or nullptr.
const ParadigmRow* matched_row(const LexEntry& entry, const FeatureMap& features) {
  const ParadigmRow* best = nullptr;
  for (const auto& row : entry.paradigm) {
    bool ok = true;
    for (const auto& [f, v] : row.key) {
      auto got = features.get(f);
      if (!got || *got != v) {
        ok = false;
        break;
      }
    }
    if (ok && (!best || row.key.size() > best->key.size())) best = &row;
  }
  return best;
}

bool paradigm_mentions(const LexEntry& entry, Feature f) {
  for (const auto& row : entry.paradigm) {
    if (row.key.contains(f)) return true;
  }
  return false;
}

std::string aux_lemma_for(const std::string& lang) { return lang == "de" ? "werden" : "be"; }

}  // namespace

Tick EngineConfig::effective_time_limit() const {
  double f = std::clamp(fluency, 0.0, 1.0);
  return static_cast<Tick>(std::llround(static_cast<double>(time_limit) * (1.0 - f)));
}

std::string EngineConfig::marker() const {
  if (!repair_marker.empty()) return repair_marker;
  return lang == "de" ? "äh" : "oops";
}

FeatureMap GenObject::feature_view() const {
  FeatureMap view;
  for (const auto& [f, cell] : features) view.set(f, cell.value);
  return view;
}

std::optional<std::string_view> GenObject::value_of(Feature f) const {
  auto it = features.find(f);
  if (it == features.end()) return std::nullopt;
  return std::string_view(it->second.value);
}

bool GenObject::has_uttered_tokens(const std::vector<TraceEvent>& trace) const {
  for (const auto& [rank, indices] : emitted) {
    for (size_t idx : indices) {
      if (!trace[idx].retracted) return true;
    }
  }
  return false;
}

GenObject* EngineState::find(const std::string& id) {
  auto it = objects.find(id);
  return it == objects.end() || !it->second.alive ? nullptr : &it->second;
}

const GenObject* EngineState::find(const std::string& id) const {
  auto it = objects.find(id);
  return it == objects.end() || !it->second.alive ? nullptr : &it->second;
}

Engine::Engine(const Lexicon& lexicon, const RuleRegistry& rules, EngineConfig config)
    : lexicon_(&lexicon), rules_(&rules) {
  st_.config = std::move(config);
}

// ---------------------------------------------------------------------------
// object bookkeeping
// ---------------------------------------------------------------------------

GenObject& Engine::get_or_create(const std::string& id, const Provenance& prov) {
  auto it = st_.objects.find(id);
  if (it != st_.objects.end() && it->second.alive) return it->second;
  GenObject obj;
  obj.id = id;
  obj.seq = st_.next_obj_seq++;
  obj.created_t = st_.clock;
  if (prov.is_default()) {
    obj.default_created = true;
    obj.created_by.insert(prov.application_id);
    register_dep({prov.application_id},
                 DepTarget{DepTarget::Kind::Object, id, "", Feature::Cat, 0});
  }
  auto [pos, inserted] = st_.objects.insert_or_assign(id, std::move(obj));
  (void)inserted;
  return pos->second;
}

const LexEntry* Engine::entry_for(const GenObject& obj) const {
  auto lemma = obj.value_of(Feature::Lemma);
  if (!lemma) return nullptr;
  return lexicon_->find(*lemma);
}

std::optional<std::string> Engine::voice_of(const GenObject& verb) const {
  auto v = verb.value_of(Feature::Voice);
  if (v) return std::string(*v);
  const LexEntry* entry = entry_for(verb);
  if (entry && paradigm_mentions(*entry, Feature::Voice)) return std::nullopt;
  return std::string("active");
}

void Engine::register_dep(const std::set<int>& deps, const DepTarget& target) {
  for (int app : deps) {
    for (auto& entry : st_.ledger) {
      if (entry.id != app) continue;
      if (std::find(entry.dependents.begin(), entry.dependents.end(), target) ==
          entry.dependents.end()) {
        entry.dependents.push_back(target);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// consume
// ---------------------------------------------------------------------------

void Engine::consume(const Increment& inc) {
  if (inc.t > st_.clock) throw EngineError("increment delivered ahead of the clock");
  if (inc.provenance.is_default()) {
    for (auto& entry : st_.ledger) {
      if (entry.id == inc.provenance.application_id) entry.injected.push_back(inc);
    }
  }
  switch (inc.kind()) {
    case IncrementKind::Entity:
      consume_entity(inc);
      break;
    case IncrementKind::Relation:
      consume_relation(inc);
      break;
    case IncrementKind::Erasure:
      consume_delete(inc);
      break;
  }
}

ConsistencyResult Engine::check_consistency(const std::string& obj, Feature feature,
                                            const std::string& input_value) const {
  ConsistencyResult res;
  const GenObject* o = st_.find(obj);
  if (!o) return res;
  auto it = o->features.find(feature);
  if (it == o->features.end() || !it->second.is_default()) return res;
  if (it->second.value == input_value) {
    res.outcome = Consistency::Coincide;
    return res;
  }
  res.outcome = Consistency::Contradicts;
  res.contradiction.obj = obj;
  res.contradiction.feature = feature;
  res.contradiction.default_value = it->second.value;
  res.contradiction.input_value = input_value;
  res.contradiction.application_id = *it->second.deps.begin();
  return res;
}

void Engine::release_claim(const std::string& obj, Feature f, const std::set<int>& apps) {
  for (int app : apps) {
    for (auto& entry : st_.ledger) {
      if (entry.id != app || !entry.live()) continue;
      entry.claims.erase({obj, f});
      TraceEvent e;
      e.t = st_.clock;
      e.type = "coincide";
      e.rule = entry.rule_id;
      e.app = app;
      e.obj = obj;
      e.feature = std::string(feature_name(f));
      if (entry.claims.empty()) {
        entry.state = AppState::Confirmed;
        e.confirmed = true;
      }
      st_.trace.push_back(std::move(e));
    }
  }
}

void Engine::handle_contradiction(const std::string& obj, Feature f, const ValueCell& cell,
                                  const std::string& input_value) {
  (void)f;
  (void)obj;
  (void)input_value;
  std::set<int> apps = cell.deps;
  for (int app : apps) {
    for (const auto& entry : st_.ledger) {
      if (entry.id == app && entry.live()) {
        retract(app);
        break;
      }
    }
  }
}

void Engine::consume_entity(const Increment& inc) {
  const EntityPayload& p = inc.entity();
  GenObject& obj = get_or_create(p.obj, inc.provenance);

  TraceEvent ce;
  ce.t = st_.clock;
  ce.type = "consume";
  ce.kind = "entity";
  ce.obj = p.obj;
  ce.provenance = inc.provenance.is_default() ? "default" : "input";
  st_.trace.push_back(std::move(ce));

  for (const auto& [f, v] : p.features) {
    if (f == Feature::Lemma && !lexicon_->find(v)) {
      throw EngineError("unknown lemma `" + v + "`");
    }
    auto it = obj.features.find(f);
    if (it != obj.features.end()) {
      ValueCell& cell = it->second;
      if (cell.value == v) {
        if (cell.is_default() && !inc.provenance.is_default()) {
          // Input verifies the assumption: upgrade in place, no recomputation.
          std::set<int> apps = cell.deps;
          cell.deps.clear();
          cell.derived = false;
          cell.rule_id.clear();
          release_claim(p.obj, f, apps);
        }
        continue;
      }
      if (inc.provenance.is_default()) {
        throw EngineError("assumed value `" + v + "` conflicts with `" + cell.value + "` on " +
                          p.obj);
      }
      if (cell.is_default()) {
        handle_contradiction(p.obj, f, cell, v);
        // Retraction erased the cell; fall through and set the input value.
      }
      ValueCell fresh;
      fresh.value = v;
      fresh.lic = st_.clock;
      obj.features[f] = std::move(fresh);
      obj.version++;
    } else {
      ValueCell fresh;
      fresh.value = v;
      fresh.lic = st_.clock;
      if (inc.provenance.is_default()) {
        fresh.deps.insert(inc.provenance.application_id);
        fresh.rule_id = inc.provenance.rule_id;
        register_dep(fresh.deps, DepTarget{DepTarget::Kind::Cell, p.obj, "", f, 0});
        for (auto& entry : st_.ledger) {
          if (entry.id == inc.provenance.application_id) entry.claims.insert({p.obj, f});
        }
      }
      obj.features[f] = std::move(fresh);
      obj.version++;
    }
    if (f == Feature::Lemma && obj.structure) {
      // A late lemma replaces the provisional frame; fills are rebuilt from
      // the surviving head links.
      obj.structure.reset();
      obj.version++;
    }
  }
  recompute_derived();
}

void Engine::consume_relation(const Increment& inc) {
  const RelationPayload& p = inc.relation();

  TraceEvent ce;
  ce.t = st_.clock;
  ce.type = "consume";
  ce.kind = "relation";
  ce.obj = p.rel;
  ce.provenance = inc.provenance.is_default() ? "default" : "input";
  st_.trace.push_back(std::move(ce));

  GenObject& head = get_or_create(p.head, inc.provenance);
  GenObject& mod = get_or_create(p.modifier, inc.provenance);

  // Reject cycles: the hierarchy stays a forest.
  for (const GenObject* up = &head; up && up->head;) {
    if (up->head->head == mod.id) throw EngineError("relation would create a cycle");
    up = st_.find(up->head->head);
  }

  auto existing = st_.relations.find(p.rel);
  if (existing != st_.relations.end() && existing->second.alive) {
    if (existing->second.head == p.head && existing->second.modifier == p.modifier) return;
    throw EngineError("relation id `" + p.rel + "` reused with different endpoints");
  }

  if (mod.head) {
    if (mod.head->head == p.head) {
      // Same attachment restated under a new relation id.
    } else if (!mod.head->deps.empty()) {
      // The existing link is assumption-caused and the input names another
      // head: withdraw the assumption, then attach normally.
      std::set<int> apps = mod.head->deps;
      for (int app : apps) {
        for (const auto& entry : st_.ledger) {
          if (entry.id == app && entry.live()) {
            retract(app);
            break;
          }
        }
      }
    } else {
      // Input revises input: detach from the old head.
      GenObject* old_head = st_.find(mod.head->head);
      if (old_head && old_head->structure) {
        for (auto it = old_head->structure->fills.begin();
             it != old_head->structure->fills.end();) {
          if (it->second.filler == mod.id) {
            it = old_head->structure->fills.erase(it);
            old_head->version++;
          } else {
            ++it;
          }
        }
      }
      st_.relations.erase(mod.head->rel);
      mod.head.reset();
      mod.version++;
    }
  }

  GenObject& mod2 = *st_.find(p.modifier);  // retraction may have moved things
  GenObject& head2 = get_or_create(p.head, inc.provenance);

  RelationRec rec;
  rec.rel = p.rel;
  rec.head = p.head;
  rec.modifier = p.modifier;
  HeadLink link;
  link.head = p.head;
  link.rel = p.rel;
  link.lic = st_.clock;
  if (inc.provenance.is_default()) {
    rec.deps.insert(inc.provenance.application_id);
    link.deps.insert(inc.provenance.application_id);
    register_dep(link.deps, DepTarget{DepTarget::Kind::Relation, p.rel, "", Feature::Cat, 0});
    register_dep(link.deps, DepTarget{DepTarget::Kind::Head, p.modifier, "", Feature::Cat, 0});
  }
  st_.relations[p.rel] = std::move(rec);
  mod2.head = std::move(link);
  mod2.version++;
  head2.version++;

  if (!integrate(mod2, in_default_injection_) && in_default_injection_) {
    throw EngineError("assumed relation cannot be integrated");
  }
  recompute_derived();
}

void Engine::consume_delete(const Increment& inc) {
  const std::string& target = inc.erasure().target;

  TraceEvent ce;
  ce.t = st_.clock;
  ce.type = "consume";
  ce.kind = "delete";
  ce.obj = target;
  ce.provenance = inc.provenance.is_default() ? "default" : "input";
  st_.trace.push_back(std::move(ce));

  if (st_.relations.count(target)) {
    const RelationRec rec = st_.relations[target];
    st_.relations.erase(target);
    GenObject* mod = st_.find(rec.modifier);
    if (mod && mod->head && mod->head->rel == target) {
      mod->head.reset();
      mod->version++;
    }
    GenObject* head = st_.find(rec.head);
    if (head && head->structure) {
      for (auto it = head->structure->fills.begin(); it != head->structure->fills.end();) {
        if (it->second.filler == rec.modifier) {
          it = head->structure->fills.erase(it);
          head->version++;
        } else {
          ++it;
        }
      }
    }
    recompute_derived();
    return;
  }
  if (st_.find(target)) {
    delete_object_effects(target);
    st_.objects.erase(target);
    recompute_derived();
    return;
  }
  throw EngineError("DELETE names unknown id `" + target + "`");
}

void Engine::delete_object_effects(const std::string& id) {
  for (auto it = st_.relations.begin(); it != st_.relations.end();) {
    if (it->second.head == id || it->second.modifier == id) {
      it = st_.relations.erase(it);
    } else {
      ++it;
    }
  }
  for (auto& [oid, obj] : st_.objects) {
    if (oid == id) continue;
    if (obj.head && obj.head->head == id) {
      obj.head.reset();
      obj.version++;
    }
    if (obj.structure) {
      for (auto fit = obj.structure->fills.begin(); fit != obj.structure->fills.end();) {
        if (fit->second.filler == id) {
          fit = obj.structure->fills.erase(fit);
          obj.version++;
        } else {
          ++fit;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// structure building and derived values
// ---------------------------------------------------------------------------

void Engine::ensure_structure(GenObject& verb) {
  auto cat = verb.value_of(Feature::Cat);
  if (!cat || *cat != "v") return;
  if (verb.structure) return;
  const LexEntry* entry = entry_for(verb);
  SyntaxStructure s;
  if (entry) {
    s.dummy = false;
    s.frame = entry->subcat;
    if (s.frame.empty()) {
      // Auxiliaries and frameless verbs still get a subject slot.
      s.frame = minimal_verbal_structure(verb.feature_view()).frame;
    }
  } else {
    s = minimal_verbal_structure(verb.feature_view());
  }
  s.root_obj = verb.id;
  s.dummy = !verb.features.count(Feature::Lemma);
  verb.structure = std::move(s);
  verb.version++;
}

bool Engine::integrate(GenObject& modifier, bool from_default_injection) {
  if (!modifier.head) return false;
  GenObject* head = st_.find(modifier.head->head);
  if (!head) return false;
  ensure_structure(*head);
  if (!head->structure) return false;
  auto sem = modifier.value_of(Feature::Function);
  if (!sem) return false;
  std::string sem_fn(*sem);
  auto voice = voice_of(*head);
  if (!voice) return false;

  auto filled = head->structure->fills.find(sem_fn);
  if (filled != head->structure->fills.end()) {
    if (filled->second.filler == modifier.id) return true;
    if (from_default_injection) {
      auto def = slot_for(*head->structure, *voice, sem_fn, st_.config.lang);
      std::string detail = def && def->case_assigned == std::optional<std::string>("nom")
                               ? "nominative can be assigned only once per frame"
                               : "slot already filled";
      throw EngineError("slot for `" + sem_fn + "` on " + head->id + " is taken: " + detail);
    }
    return false;
  }

  SlotFill fill;
  fill.lic = modifier.head->lic;
  fill.deps = modifier.head->deps;
  for (int app : head->created_by) fill.deps.insert(app);
  auto fn_cell = modifier.features.find(Feature::Function);
  if (fn_cell != modifier.features.end()) {
    fill.lic = std::max(fill.lic, fn_cell->second.lic);
    for (int app : fn_cell->second.deps) fill.deps.insert(app);
  }
  auto voice_cell = head->features.find(Feature::Voice);
  if (voice_cell != head->features.end()) {
    fill.lic = std::max(fill.lic, voice_cell->second.lic);
  }
  auto lemma_cell = head->features.find(Feature::Lemma);
  if (lemma_cell != head->features.end()) {
    fill.lic = std::max(fill.lic, lemma_cell->second.lic);
  }

  CombineOutcome outcome = combine(modifier.id, modifier.feature_view(), *head->structure,
                                   sem_fn, *voice, st_.config.lang, fill);
  if (!outcome.ok) {
    if (from_default_injection) throw EngineError(outcome.error);
    return false;
  }
  register_dep(fill.deps, DepTarget{DepTarget::Kind::Fill, head->id, sem_fn, Feature::Cat, 0});

  if (auto inherited_case = outcome.inherited.get(Feature::Case)) {
    auto cell = modifier.features.find(Feature::Case);
    if (cell == modifier.features.end()) {
      ValueCell derived;
      derived.value = std::string(*inherited_case);
      derived.deps = fill.deps;
      derived.lic = fill.lic;
      derived.derived = true;
      modifier.features[Feature::Case] = std::move(derived);
      register_dep(fill.deps, DepTarget{DepTarget::Kind::Cell, modifier.id, "", Feature::Case, 0});
    }
  }
  modifier.version++;
  head->version++;
  return true;
}

void Engine::recompute_derived() {
  std::vector<std::string> order;
  for (const auto& [id, obj] : st_.objects) {
    if (obj.alive) order.push_back(id);
  }
  std::sort(order.begin(), order.end(), [this](const std::string& a, const std::string& b) {
    return st_.objects.at(a).seq < st_.objects.at(b).seq;
  });

  for (int pass = 0; pass < 6; ++pass) {
    bool changed = false;
    for (const std::string& id : order) {
      GenObject* obj = st_.find(id);
      if (!obj) continue;
      ensure_structure(*obj);
      if (obj->head && obj->features.count(Feature::Function)) {
        GenObject* head = st_.find(obj->head->head);
        if (head) {
          auto sem = obj->value_of(Feature::Function);
          bool already = head->structure && sem &&
                         head->structure->fills.count(std::string(*sem)) &&
                         head->structure->fills.at(std::string(*sem)).filler == id;
          if (!already && integrate(*obj, false)) changed = true;
        }
      }
    }

    // Inherited cells follow the current structure.
    for (const std::string& id : order) {
      GenObject* obj = st_.find(id);
      if (!obj) continue;

      // Case from the slot the object fills.
      const GenObject* head = obj->head ? st_.find(obj->head->head) : nullptr;
      std::optional<ComplementSlot> def;
      const SlotFill* fill = nullptr;
      if (head && head->structure) {
        auto sem = obj->value_of(Feature::Function);
        if (sem) {
          auto it = head->structure->fills.find(std::string(*sem));
          if (it != head->structure->fills.end() && it->second.filler == id) {
            auto voice = voice_of(*head);
            if (voice) def = slot_for(*head->structure, *voice, std::string(*sem), st_.config.lang);
            fill = &it->second;
          }
        }
      }
      auto case_cell = obj->features.find(Feature::Case);
      if (def && def->case_assigned && fill) {
        if (case_cell == obj->features.end()) {
          ValueCell derived;
          derived.value = *def->case_assigned;
          derived.deps = fill->deps;
          derived.lic = fill->lic;
          derived.derived = true;
          obj->features[Feature::Case] = std::move(derived);
          register_dep(fill->deps, DepTarget{DepTarget::Kind::Cell, id, "", Feature::Case, 0});
          obj->version++;
          changed = true;
        } else if (case_cell->second.derived && case_cell->second.value != *def->case_assigned) {
          case_cell->second.value = *def->case_assigned;
          case_cell->second.deps = fill->deps;
          case_cell->second.lic = std::max(fill->lic, st_.clock);
          register_dep(fill->deps, DepTarget{DepTarget::Kind::Cell, id, "", Feature::Case, 0});
          obj->version++;
          changed = true;
        }
      } else if (case_cell != obj->features.end() && case_cell->second.derived && !def) {
        obj->features.erase(case_cell);
        obj->version++;
        changed = true;
      }

      // Number agreement: the verb inherits number from its subject filler.
      if (obj->structure) {
        auto voice = voice_of(*obj);
        if (voice) {
          std::string subj_sem = required_subject_sem(*voice);
          auto it = obj->structure->fills.find(subj_sem);
          const GenObject* subj = it != obj->structure->fills.end()
                                      ? st_.find(it->second.filler)
                                      : nullptr;
          auto num_cell = obj->features.find(Feature::Number);
          if (subj) {
            auto subj_num = subj->features.find(Feature::Number);
            if (subj_num != subj->features.end()) {
              std::set<int> deps = subj_num->second.deps;
              for (int app : it->second.deps) deps.insert(app);
              Tick lic = std::max(subj_num->second.lic, it->second.lic);
              if (num_cell == obj->features.end()) {
                ValueCell derived;
                derived.value = subj_num->second.value;
                derived.deps = deps;
                derived.lic = lic;
                derived.derived = true;
                obj->features[Feature::Number] = std::move(derived);
                register_dep(deps, DepTarget{DepTarget::Kind::Cell, id, "", Feature::Number, 0});
                obj->version++;
                changed = true;
              } else if (num_cell->second.derived &&
                         num_cell->second.value != subj_num->second.value) {
                num_cell->second.value = subj_num->second.value;
                num_cell->second.deps = deps;
                num_cell->second.lic = lic;
                register_dep(deps, DepTarget{DepTarget::Kind::Cell, id, "", Feature::Number, 0});
                obj->version++;
                changed = true;
              }
            } else if (num_cell != obj->features.end() && num_cell->second.derived) {
              obj->features.erase(num_cell);
              obj->version++;
              changed = true;
            }
          } else if (num_cell != obj->features.end() && num_cell->second.derived) {
            obj->features.erase(num_cell);
            obj->version++;
            changed = true;
          }
        }
      }
    }
    if (!changed) break;
  }
}

// ---------------------------------------------------------------------------
// yields and linear order
// ---------------------------------------------------------------------------

Engine::YieldInfo Engine::np_yield(const GenObject& obj) const {
  YieldInfo info;
  auto lemma_cell = obj.features.find(Feature::Lemma);
  if (lemma_cell == obj.features.end()) {
    info.missing.insert(Feature::Lemma);
    return info;
  }
  const LexEntry* entry = lexicon_->find(lemma_cell->second.value);
  if (!entry) {
    info.missing.insert(Feature::Lemma);
    return info;
  }
  info.lic = lemma_cell->second.lic;
  for (int app : lemma_cell->second.deps) info.deps.insert(app);
  FeatureMap view = obj.feature_view();

  auto use_cell = [&](Feature f) {
    auto it = obj.features.find(f);
    if (it == obj.features.end()) return;
    info.lic = std::max(info.lic, it->second.lic);
    for (int app : it->second.deps) info.deps.insert(app);
  };

  // Preposition and position come from the slot the object fills.
  const GenObject* head = obj.head ? st_.find(obj.head->head) : nullptr;
  if (head && head->structure) {
    auto sem = obj.value_of(Feature::Function);
    if (sem) {
      auto it = head->structure->fills.find(std::string(*sem));
      if (it != head->structure->fills.end() && it->second.filler == obj.id) {
        auto voice = voice_of(*head);
        if (voice) {
          auto def = slot_for(*head->structure, *voice, std::string(*sem), st_.config.lang);
          if (def && def->prep) info.tokens.push_back(*def->prep);
          info.lic = std::max(info.lic, it->second.lic);
          for (int app : it->second.deps) info.deps.insert(app);
        }
      }
    }
  }

  if (entry->article) {
    const LexEntry* article = lexicon_->find(*entry->article);
    if (article) {
      const ParadigmRow* row = matched_row(*article, view);
      if (!row) {
        for (Feature f : missing_features(*article, view)) info.missing.insert(f);
      } else {
        for (const auto& [f, v] : row->key) use_cell(f);
        for (auto& tok : tokenize(row->form)) info.tokens.push_back(tok);
      }
    }
  }

  const ParadigmRow* row = matched_row(*entry, view);
  if (!row) {
    for (Feature f : missing_features(*entry, view)) info.missing.insert(f);
  } else {
    for (const auto& [f, v] : row->key) use_cell(f);
    for (auto& tok : tokenize(row->form)) info.tokens.push_back(tok);
  }

  info.determinable = info.missing.empty();
  if (!info.determinable) info.tokens.clear();
  return info;
}

Engine::YieldInfo Engine::verb_chunk_yield(const GenObject& verb, bool final_chunk) const {
  YieldInfo info;
  const LexEntry* entry = entry_for(verb);
  if (!entry) {
    info.missing.insert(Feature::Lemma);
    return info;
  }
  FeatureMap view = verb.feature_view();
  auto use_cell = [&](Feature f) {
    auto it = verb.features.find(f);
    if (it == verb.features.end()) return;
    info.lic = std::max(info.lic, it->second.lic);
    for (int app : it->second.deps) info.deps.insert(app);
  };
  use_cell(Feature::Lemma);

  auto voice = voice_of(verb);
  if (!voice) {
    info.missing.insert(Feature::Voice);
    return info;
  }
  use_cell(Feature::Voice);

  if (*voice != "passive") {
    if (final_chunk) return info;  // no final chunk under active voice
    const ParadigmRow* row = matched_row(*entry, view);
    if (!row) {
      for (Feature f : missing_features(*entry, view)) info.missing.insert(f);
      return info;
    }
    for (const auto& [f, v] : row->key) use_cell(f);
    info.tokens = tokenize(row->form);
    info.determinable = true;
    return info;
  }

  if (final_chunk) {
    const ParadigmRow* row = matched_row(*entry, view);
    if (!row) {
      for (Feature f : missing_features(*entry, view)) info.missing.insert(f);
      return info;
    }
    for (const auto& [f, v] : row->key) use_cell(f);
    info.tokens = tokenize(row->form);
    info.determinable = true;
    return info;
  }

  const LexEntry* aux = lexicon_->find(aux_lemma_for(st_.config.lang));
  if (!aux) {
    info.missing.insert(Feature::Lemma);
    return info;
  }
  const ParadigmRow* row = matched_row(*aux, view);
  if (!row) {
    for (Feature f : missing_features(*aux, view)) info.missing.insert(f);
    return info;
  }
  for (const auto& [f, v] : row->key) use_cell(f);
  info.tokens = tokenize(row->form);
  info.determinable = true;
  return info;
}

const GenObject* Engine::root_of(const GenObject& obj) const {
  const GenObject* cur = &obj;
  for (int guard = 0; guard < 64; ++guard) {
    if (!cur->head) return cur;
    const GenObject* up = st_.find(cur->head->head);
    if (!up) return cur;
    cur = up;
  }
  return cur;
}

std::vector<const GenObject*> Engine::roots() const {
  std::vector<const GenObject*> out;
  std::map<std::string, int> tree_seq;  // root id -> min seq in tree
  for (const auto& [id, obj] : st_.objects) {
    if (!obj.alive) continue;
    const GenObject* root = root_of(obj);
    auto it = tree_seq.find(root->id);
    if (it == tree_seq.end() || obj.seq < it->second) tree_seq[root->id] = obj.seq;
  }
  std::vector<std::pair<int, const GenObject*>> order;
  for (const auto& [rid, seq] : tree_seq) {
    order.push_back({seq, st_.find(rid)});
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [seq, root] : order) out.push_back(root);
  return out;
}

std::vector<std::string> Engine::tree_members(const GenObject& root) const {
  std::vector<std::string> out;
  for (const auto& [id, obj] : st_.objects) {
    if (obj.alive && root_of(obj)->id == root.id) out.push_back(id);
  }
  return out;
}

std::vector<Engine::SpanItem> Engine::span_items(const GenObject& root) const {
  std::vector<SpanItem> items;
  if (!root.structure) {
    SpanItem item;
    item.rank = 1;
    item.obj = root.id;
    item.yield = np_yield(root);
    items.push_back(std::move(item));
    return items;
  }
  auto voice = voice_of(root);
  std::string v = voice.value_or("active");
  for (const auto& [sem, fill] : root.structure->fills) {
    const GenObject* filler = st_.find(fill.filler);
    if (!filler) continue;
    auto def = slot_for(*root.structure, v, sem, st_.config.lang);
    SpanItem item;
    item.rank = def ? def->position_rank : 99;
    item.obj = filler->id;
    item.yield = np_yield(*filler);
    if (!voice) item.yield.determinable = false;
    items.push_back(std::move(item));
  }
  if (!root.structure->dummy) {
    SpanItem head_chunk;
    head_chunk.rank = kVerbRank;
    head_chunk.obj = root.id;
    head_chunk.is_verb_chunk = true;
    head_chunk.yield = verb_chunk_yield(root, false);
    items.push_back(std::move(head_chunk));
    if (voice && *voice == "passive") {
      SpanItem final_chunk;
      final_chunk.rank = kVerbFinalRank;
      final_chunk.obj = root.id;
      final_chunk.is_verb_chunk = true;
      final_chunk.is_final_chunk = true;
      final_chunk.yield = verb_chunk_yield(root, true);
      items.push_back(std::move(final_chunk));
    }
  }
  std::sort(items.begin(), items.end(),
            [](const SpanItem& a, const SpanItem& b) { return a.rank < b.rank; });
  return items;
}

namespace {

int unfilled_required_rank(const SyntaxStructure& s, const std::string& voice,
                           const std::string& lang) {
  std::string required = required_subject_sem(voice);
  if (s.fills.count(required)) return std::numeric_limits<int>::max();
  auto def = slot_for(s, voice, required, lang);
  return def ? def->position_rank : 1;
}

}  // namespace

bool Engine::tree_divergent(const GenObject& root) const {
  std::vector<SpanItem> items = span_items(root);
  int max_emitted = 0;
  std::map<std::string, std::map<int, std::vector<std::string>>> live_texts;
  for (const std::string& id : tree_members(root)) {
    const GenObject* obj = st_.find(id);
    if (!obj) continue;
    for (const auto& [rank, indices] : obj->emitted) {
      for (size_t idx : indices) {
        if (!st_.trace[idx].retracted) {
          live_texts[id][rank].push_back(st_.trace[idx].text);
          max_emitted = std::max(max_emitted, rank);
        }
      }
    }
  }
  if (live_texts.empty()) return false;
  // Every uttered rank must still be produced, at the same rank, with the
  // same surface text.
  for (const auto& [id, ranks] : live_texts) {
    for (const auto& [rank, texts] : ranks) {
      bool matched = false;
      for (const auto& item : items) {
        if (item.obj != id || item.rank != rank) continue;
        if (item.yield.determinable && item.yield.tokens == texts) matched = true;
        break;
      }
      if (!matched) return true;
    }
  }
  // Late material due at an already-passed position forces a repetition.
  for (const auto& item : items) {
    const GenObject* obj = st_.find(item.obj);
    if (!obj || obj->emitted.count(item.rank)) continue;
    if (item.rank < max_emitted) return true;
  }
  return false;
}

bool Engine::span_ready(const GenObject& root) const {
  std::vector<SpanItem> items = span_items(root);
  for (const auto& item : items) {
    if (!item.yield.determinable) return false;
  }
  if (root.structure) {
    auto voice = voice_of(root);
    if (!voice) return false;
    if (unfilled_required_rank(*root.structure, *voice, st_.config.lang) !=
        std::numeric_limits<int>::max()) {
      return false;
    }
  }
  return true;
}

bool Engine::tree_fully_uttered(const GenObject& root) const {
  for (const auto& item : span_items(root)) {
    const GenObject* obj = st_.find(item.obj);
    if (!obj || !obj->emitted.count(item.rank)) return false;
  }
  return true;
}

size_t Engine::emit_token(const std::string& text, const std::string& obj, int rank, Tick lic,
                          bool repeat, const std::set<int>& deps) {
  TraceEvent e;
  e.t = st_.clock;
  e.type = "token";
  e.text = text;
  e.obj = obj;
  e.lic = lic;
  e.repeat = repeat;
  st_.trace.push_back(std::move(e));
  size_t idx = st_.trace.size() - 1;
  GenObject* o = st_.find(obj);
  if (o) o->emitted[rank].push_back(idx);
  register_dep(deps, DepTarget{DepTarget::Kind::Token, obj, "", Feature::Cat, idx});
  return idx;
}

std::vector<size_t> Engine::try_utter() {
  std::vector<size_t> emitted_now;
  for (const GenObject* root : roots()) {
    if (tree_divergent(*root)) break;  // repair pending; later trees wait
    std::vector<SpanItem> items = span_items(*root);
    int barrier = std::numeric_limits<int>::max();
    if (root->structure) {
      auto voice = voice_of(*root);
      if (!voice) {
        barrier = 1;
      } else {
        barrier = unfilled_required_rank(*root->structure, *voice, st_.config.lang);
      }
    }
    bool blocked = false;
    for (const auto& item : items) {
      if (item.rank > barrier) {
        blocked = true;
        break;
      }
      GenObject* obj = st_.find(item.obj);
      if (!obj) continue;
      if (obj->emitted.count(item.rank)) continue;
      if (!item.yield.determinable) {
        blocked = true;
        break;
      }
      if (obj->state == ObjState::Waiting) obj->state = ObjState::Verbalizable;
      for (const auto& tok : item.yield.tokens) {
        emitted_now.push_back(
            emit_token(tok, item.obj, item.rank, item.yield.lic, false, item.yield.deps));
      }
      obj->state = ObjState::PartiallyUttered;
    }
    // Settle per-object states for this tree.
    for (const std::string& id : tree_members(*root)) {
      GenObject* obj = st_.find(id);
      if (!obj || obj->emitted.empty()) continue;
      bool all_done = true;
      for (const auto& item : items) {
        if (item.obj == id && !obj->emitted.count(item.rank)) all_done = false;
      }
      obj->state = all_done ? ObjState::Uttered : ObjState::PartiallyUttered;
    }
    if (blocked || !tree_fully_uttered(*root)) break;  // next root waits
  }
  return emitted_now;
}

// ---------------------------------------------------------------------------
// repair
// ---------------------------------------------------------------------------

void Engine::do_repair(const GenObject& root, RepairPlan& plan) {
  plan.anchor = root.id;
  plan.uttered_affected = true;

  TraceEvent marker;
  marker.t = st_.clock;
  marker.type = "repair";
  marker.text = st_.config.marker();
  marker.obj = root.id;
  st_.trace.push_back(std::move(marker));
  plan.events.push_back(st_.trace.size() - 1);

  // Withdraw the previously spoken span; the events stay in the transcript,
  // only flagged.
  std::vector<std::string> members = tree_members(root);
  for (const std::string& id : members) {
    GenObject* obj = st_.find(id);
    if (!obj) continue;
    for (const auto& [rank, indices] : obj->emitted) {
      for (size_t idx : indices) st_.trace[idx].retracted = true;
    }
    obj->emitted.clear();
    if (obj->state != ObjState::Waiting) obj->state = ObjState::Verbalizable;
  }

  auto previously_spoken = [&](const std::string& obj, const std::string& text) {
    for (const auto& e : st_.trace) {
      if (e.type == "token" && e.obj == obj && e.text == text && e.retracted) return true;
    }
    return false;
  };

  for (const auto& item : span_items(root)) {
    GenObject* obj = st_.find(item.obj);
    if (!obj) continue;
    for (const auto& tok : item.yield.tokens) {
      bool repeat = previously_spoken(item.obj, tok);
      plan.events.push_back(
          emit_token(tok, item.obj, item.rank, st_.clock, repeat, item.yield.deps));
    }
    obj->state = ObjState::Uttered;
  }
  for (const std::string& id : members) {
    GenObject* obj = st_.find(id);
    if (obj && !obj->emitted.empty()) obj->state = ObjState::Uttered;
  }
}

RepairPlan Engine::plan_repair(const std::vector<std::string>& affected) {
  RepairPlan plan;
  for (int app : st_.recent_retractions) plan.retracted_applications.insert(app);
  st_.recent_retractions.clear();

  std::vector<const GenObject*> repair_roots;
  for (const std::string& id : affected) {
    const GenObject* obj = st_.find(id);
    if (!obj) continue;
    plan.affected_objects.push_back(id);
    const GenObject* root = root_of(*obj);
    if (std::find(repair_roots.begin(), repair_roots.end(), root) == repair_roots.end()) {
      repair_roots.push_back(root);
    }
  }
  for (const GenObject* root : repair_roots) {
    if (!tree_divergent(*root)) continue;  // silent revision or already clean
    if (!span_ready(*root)) {
      plan.uttered_affected = true;  // repair stays pending until the span closes
      continue;
    }
    do_repair(*root, plan);
  }
  return plan;
}

// ---------------------------------------------------------------------------
// default situations
// ---------------------------------------------------------------------------

std::vector<StallReport> Engine::detect_default_situation() const {
  std::vector<StallReport> reports;
  for (const auto& [id, obj] : st_.objects) {
    if (!obj.alive) continue;
    if (obj.state == ObjState::Uttered) continue;
    auto cat = obj.value_of(Feature::Cat);
    StallReport report;
    report.obj = id;
    auto since = st_.stalled_since.find(id);
    report.since = since == st_.stalled_since.end() ? st_.clock : since->second;

    if (!cat) {
      report.missing.insert(Feature::Cat);
      reports.push_back(std::move(report));
      continue;
    }
    if (*cat == "v") {
      if (obj.default_created && !obj.features.count(Feature::Lemma)) continue;  // scaffolding
      YieldInfo head_chunk = verb_chunk_yield(obj, false);
      for (Feature f : head_chunk.missing) report.missing.insert(f);
      auto voice = voice_of(obj);
      if (voice && *voice == "passive") {
        YieldInfo final_chunk = verb_chunk_yield(obj, true);
        for (Feature f : final_chunk.missing) report.missing.insert(f);
      }
    } else {
      YieldInfo yield = np_yield(obj);
      for (Feature f : yield.missing) report.missing.insert(f);
      if (obj.features.count(Feature::Function)) {
        const GenObject* head = obj.head ? st_.find(obj.head->head) : nullptr;
        bool headless = !head || !head->features.count(Feature::Lemma);
        if (headless && (!head || !head->default_created)) {
          report.structural_no_head = !head;
          if (!head) {
            if (!obj.features.count(Feature::Case)) report.missing.insert(Feature::Case);
          }
        }
        if (!obj.features.count(Feature::Case) && head && !head->structure) {
          report.missing.insert(Feature::Case);
        }
      }
    }
    if (!report.missing.empty() || report.structural_no_head) {
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

void Engine::refresh_stalls() {
  std::vector<StallReport> reports = detect_default_situation();
  std::set<std::string> now;
  for (const auto& r : reports) now.insert(r.obj);
  for (const auto& r : reports) {
    if (!st_.stalled_since.count(r.obj)) {
      st_.stalled_since[r.obj] = st_.clock;
      TraceEvent e;
      e.t = st_.clock;
      e.type = "stall";
      e.obj = r.obj;
      for (Feature f : r.missing) e.missing.push_back(std::string(feature_name(f)));
      if (r.structural_no_head) e.missing.push_back("no-head");
      st_.trace.push_back(std::move(e));
    }
  }
  for (auto it = st_.stalled_since.begin(); it != st_.stalled_since.end();) {
    if (!now.count(it->first)) {
      it = st_.stalled_since.erase(it);
    } else {
      ++it;
    }
  }
}

// ---------------------------------------------------------------------------
// default handler
// ---------------------------------------------------------------------------

std::vector<Candidate> Engine::match_defaults() const {
  std::vector<Candidate> out;
  std::vector<StallReport> reports = detect_default_situation();
  for (const auto& rule : rules_->rules()) {
    if (rule.lang != "any" && rule.lang != st_.config.lang) continue;
    for (const auto& report : reports) {
      const GenObject* obj = st_.find(report.obj);
      if (!obj) continue;
      bool ok = true;
      for (const auto& test : rule.preconditions) {
        switch (test.kind) {
          case RuleTest::Kind::FeatureEq: {
            auto v = obj->value_of(test.feature);
            ok = v && *v == test.value;
            break;
          }
          case RuleTest::Kind::Missing:
            ok = !obj->features.count(test.feature);
            break;
          case RuleTest::Kind::NoHeadLemma: {
            const GenObject* head = obj->head ? st_.find(obj->head->head) : nullptr;
            ok = !head || !head->features.count(Feature::Lemma);
            break;
          }
          case RuleTest::Kind::HasHead: {
            const GenObject* head = obj->head ? st_.find(obj->head->head) : nullptr;
            ok = head != nullptr;
            break;
          }
          case RuleTest::Kind::IsUttered:
            ok = obj->has_uttered_tokens(st_.trace);
            break;
        }
        if (!ok) break;
      }
      if (ok) {
        Candidate cand;
        cand.rule = &rule;
        cand.obj = report.obj;
        cand.certainty = rule.certainty;
        cand.order = static_cast<int>(out.size());
        out.push_back(std::move(cand));
      }
    }
  }
  return out;
}

std::optional<Candidate> Engine::select_default(const std::vector<Candidate>& candidates) {
  if (candidates.empty()) return std::nullopt;
  const Candidate* best = &candidates.front();
  for (const auto& cand : candidates) {
    if (cand.certainty > best->certainty ||
        (cand.certainty == best->certainty && cand.order < best->order)) {
      best = &cand;
    }
  }
  return *best;
}

bool Engine::should_fire(const Candidate& cand) const {
  auto since = st_.stalled_since.find(cand.obj);
  if (since == st_.stalled_since.end()) return false;
  if (st_.clock - since->second < st_.config.effective_time_limit()) return false;
  if (!(cand.certainty > st_.config.threshold)) return false;
  int live = 0;
  for (const auto& entry : st_.ledger) {
    if (entry.live()) ++live;
  }
  return live < st_.config.max_defaults;
}

double Engine::global_certainty() const {
  double product = 1.0;
  for (const auto& entry : st_.ledger) {
    if (entry.live()) product *= entry.certainty;
  }
  return product;
}

bool Engine::apply_default(const Candidate& cand) {
  const DefaultDescription& rule = *cand.rule;
  EngineState snapshot = st_;
  int app_id = st_.next_app++;

  AppliedDefault entry;
  entry.id = app_id;
  entry.rule_id = rule.rule_id;
  entry.certainty = rule.certainty;
  entry.t_applied = st_.clock;
  entry.binding[rule.preconditions.front().var] = cand.obj;
  st_.ledger.push_back(std::move(entry));

  auto resolve = [&](const std::string& var, const FeatureMap* tmpl) -> std::string {
    AppliedDefault& rec = st_.ledger.back();
    auto it = rec.binding.find(var);
    if (it != rec.binding.end()) return it->second;
    // A fresh entity variable may reuse a live scaffold created by the same
    // rule when the templates agree; that re-licenses the shared object.
    if (tmpl) {
      const GenObject* reuse = nullptr;
      for (const auto& [id, obj] : st_.objects) {
        if (!obj.alive || !obj.default_created) continue;
        bool same_rule = false;
        for (const auto& other : st_.ledger) {
          if (other.live() && other.rule_id == rule.rule_id && obj.created_by.count(other.id)) {
            same_rule = true;
          }
        }
        if (!same_rule) continue;
        if (!unify(obj.feature_view(), *tmpl)) continue;
        if (!reuse || obj.seq < reuse->seq) reuse = &obj;
      }
      if (reuse) {
        rec.binding[var] = reuse->id;
        return reuse->id;
      }
    }
    std::string fresh = "~" + var.substr(1) + std::to_string(st_.next_fresh++);
    rec.binding[var] = fresh;
    return fresh;
  };

  in_default_injection_ = true;
  try {
    Provenance prov = Provenance::from_default(rule.rule_id, app_id);
    for (const auto& tmpl : rule.body) {
      if (const auto* e = std::get_if<BodyEntity>(&tmpl)) {
        Increment inc;
        inc.t = st_.clock;
        inc.provenance = prov;
        EntityPayload p;
        p.obj = resolve(e->var, &e->features);
        p.features = e->features;
        inc.payload = std::move(p);
        consume(inc);
      } else if (const auto* r = std::get_if<BodyRelation>(&tmpl)) {
        Increment inc;
        inc.t = st_.clock;
        inc.provenance = prov;
        RelationPayload p;
        p.rel = resolve(r->rel_var, nullptr);
        p.head = resolve(r->head_var, nullptr);
        p.modifier = resolve(r->mod_var, nullptr);
        inc.payload = std::move(p);
        consume(inc);
      }
    }
    in_default_injection_ = false;
  } catch (const EngineError& err) {
    in_default_injection_ = false;
    std::string reason = err.what();
    st_ = std::move(snapshot);
    const GenObject* obj = st_.find(cand.obj);
    st_.discarded[{rule.rule_id, cand.obj}] = obj ? obj->version : 0;
    TraceEvent e;
    e.t = st_.clock;
    e.type = "default_discarded";
    e.rule = rule.rule_id;
    e.obj = cand.obj;
    e.reason = reason;
    st_.trace.push_back(std::move(e));
    return false;
  }

  TraceEvent e;
  e.t = st_.clock;
  e.type = "default_applied";
  e.rule = rule.rule_id;
  e.certainty = rule.certainty;
  e.app = app_id;
  e.obj = cand.obj;
  st_.trace.push_back(std::move(e));
  return true;
}

void Engine::run_default_gate() {
  if (st_.stalled_since.empty()) return;
  std::vector<Candidate> cands = match_defaults();
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.certainty > b.certainty;
  });
  for (const auto& cand : cands) {
    auto key = std::make_pair(cand.rule->rule_id, cand.obj);
    auto seen = st_.discarded.find(key);
    if (seen != st_.discarded.end()) {
      const GenObject* obj = st_.find(cand.obj);
      if (obj && obj->version == seen->second) continue;
    }
    if (!should_fire(cand)) continue;
    if (apply_default(cand)) return;  // one application per quiescent point
  }
}

// ---------------------------------------------------------------------------
// retraction
// ---------------------------------------------------------------------------

std::vector<std::string> Engine::retract(int application_id) {
  AppliedDefault* entry = nullptr;
  for (auto& e : st_.ledger) {
    if (e.id == application_id) entry = &e;
  }
  if (!entry || !entry->live()) {
    throw EngineError("retract: unknown or dead application " + std::to_string(application_id));
  }

  std::set<std::string> affected;
  std::vector<std::string> doomed_objects;
  for (const DepTarget& target : entry->dependents) {
    switch (target.kind) {
      case DepTarget::Kind::Cell: {
        GenObject* obj = st_.find(target.a);
        if (!obj) break;
        auto it = obj->features.find(target.feature);
        if (it != obj->features.end() && it->second.deps.count(application_id)) {
          obj->features.erase(it);
          obj->version++;
          affected.insert(target.a);
        }
        break;
      }
      case DepTarget::Kind::Fill: {
        GenObject* head = st_.find(target.a);
        if (!head || !head->structure) break;
        auto it = head->structure->fills.find(target.b);
        if (it != head->structure->fills.end() && it->second.deps.count(application_id)) {
          affected.insert(it->second.filler);
          affected.insert(target.a);
          head->structure->fills.erase(it);
          head->version++;
        }
        break;
      }
      case DepTarget::Kind::Head: {
        GenObject* obj = st_.find(target.a);
        if (obj && obj->head && obj->head->deps.count(application_id)) {
          st_.relations.erase(obj->head->rel);
          obj->head.reset();
          obj->version++;
          affected.insert(target.a);
        }
        break;
      }
      case DepTarget::Kind::Relation: {
        auto it = st_.relations.find(target.a);
        if (it != st_.relations.end() && it->second.deps.count(application_id)) {
          st_.relations.erase(it);
        }
        break;
      }
      case DepTarget::Kind::Object:
        doomed_objects.push_back(target.a);
        break;
      case DepTarget::Kind::Token:
        break;  // the transcript stays; the repair step flags superseded tokens
    }
  }
  entry->state = AppState::Retracted;

  for (const std::string& id : doomed_objects) {
    // An assumption-created object survives only when a later live
    // application still references it.
    bool relicensed = false;
    for (const auto& other : st_.ledger) {
      if (!other.live()) continue;
      for (const Increment& inc : other.injected) {
        if (inc.kind() == IncrementKind::Entity && inc.entity().obj == id) relicensed = true;
        if (inc.kind() == IncrementKind::Relation &&
            (inc.relation().head == id || inc.relation().modifier == id)) {
          relicensed = true;
        }
      }
    }
    if (!relicensed && st_.objects.count(id)) {
      delete_object_effects(id);
      st_.objects.erase(id);
      affected.erase(id);
    }
  }

  TraceEvent e;
  e.t = st_.clock;
  e.type = "default_retracted";
  e.rule = entry->rule_id;
  e.app = application_id;
  e.objs.assign(affected.begin(), affected.end());
  st_.trace.push_back(std::move(e));
  st_.recent_retractions.push_back(application_id);

  recompute_derived();
  return {affected.begin(), affected.end()};
}

// ---------------------------------------------------------------------------
// clock
// ---------------------------------------------------------------------------

void Engine::deliver_due() {
  while (!st_.pending.empty() && st_.pending.front().t <= st_.clock) {
    Increment inc = st_.pending.front();
    st_.pending.pop_front();
    consume(inc);
  }
}

void Engine::tick_steps() {
  deliver_due();
  recompute_derived();
  // Resolve pending repairs before any fresh token can slip out.
  for (const GenObject* root : roots()) {
    if (tree_divergent(*root) && span_ready(*root)) {
      RepairPlan plan;
      do_repair(*root, plan);
    }
  }
  try_utter();
  refresh_stalls();
  run_default_gate();
}

std::vector<TraceEvent> Engine::advance_clock(Tick until) {
  if (until < st_.clock) throw EngineError("advance_clock cannot move backwards");
  size_t mark = st_.trace.size();
  while (st_.clock < until) {
    ++st_.clock;
    tick_steps();
  }
  return {st_.trace.begin() + static_cast<long>(mark), st_.trace.end()};
}

bool Engine::utterance_complete() const {
  for (const GenObject* root : roots()) {
    if (tree_divergent(*root)) return false;
  }
  for (const auto& [id, obj] : st_.objects) {
    if (!obj.alive) continue;
    if (obj.default_created && !obj.features.count(Feature::Lemma)) continue;  // scaffolding
    if (obj.state != ObjState::Uttered) return false;
  }
  return true;
}

std::optional<Tick> Engine::next_fire_time() const {
  std::optional<Tick> best;
  int live = 0;
  for (const auto& entry : st_.ledger) {
    if (entry.live()) ++live;
  }
  if (live >= st_.config.max_defaults) return std::nullopt;
  for (const Candidate& cand : match_defaults()) {
    if (!(cand.certainty > st_.config.threshold)) continue;
    auto key = std::make_pair(cand.rule->rule_id, cand.obj);
    auto seen = st_.discarded.find(key);
    if (seen != st_.discarded.end()) {
      const GenObject* obj = st_.find(cand.obj);
      if (obj && obj->version == seen->second) continue;
    }
    auto since = st_.stalled_since.find(cand.obj);
    Tick base = since == st_.stalled_since.end() ? st_.clock : since->second;
    Tick at = std::max(st_.clock + 1, base + st_.config.effective_time_limit());
    if (!best || at < *best) best = at;
  }
  return best;
}

void Engine::start(const Scenario& scenario) {
  st_.pending.assign(scenario.increments.begin(), scenario.increments.end());
  st_.clock = 0;
  tick_steps();
}

int Engine::run(const Scenario& scenario) {
  start(scenario);
  advance_clock(scenario.end_time);

  // All given input is consumed. Assumptions may still fire; otherwise the
  // run either finished or dead-ended. Each firing needs one settle tick for
  // the utterance it unblocks.
  int guard = 0;
  while (!utterance_complete() && guard++ < 1000) {
    auto at = next_fire_time();
    if (!at) break;
    advance_clock(*at);
    if (!utterance_complete()) advance_clock(st_.clock + 1);
  }

  int exit_code = utterance_complete() ? 0 : 2;
  TraceEvent e;
  e.t = st_.clock;
  e.type = "end";
  e.exit_code = exit_code;
  e.global_certainty = global_certainty();
  int live = 0;
  for (const auto& entry : st_.ledger) {
    if (entry.live()) ++live;
  }
  e.live_defaults = live;
  st_.trace.push_back(std::move(e));
  return exit_code;
}

std::string Engine::transcript_line() const {
  std::string out;
  for (const auto& e : st_.trace) {
    if (!e.is_speech()) continue;
    if (!out.empty()) out += " ";
    out += e.text;
  }
  return out;
}

std::vector<std::string> Engine::effective_tokens() const {
  std::vector<std::string> out;
  for (const auto& e : st_.trace) {
    if (e.type != "token" || e.retracted) continue;
    out.push_back(e.text);
  }
  return out;
}

BatchResult Engine::batch_result() const {
  BatchResult res;
  res.ok = utterance_complete();
  res.tokens = effective_tokens();
  res.trace = st_.trace;
  if (!res.ok) res.missing = detect_default_situation();
  return res;
}

BatchResult batch_generate(const Scenario& scenario, const Lexicon& lexicon,
                           EngineConfig config) {
  static const RuleRegistry kNoRules;
  Engine engine(lexicon, kNoRules, std::move(config));
  Scenario flat = scenario;
  for (auto& inc : flat.increments) inc.t = 0;
  flat.end_time = 0;
  engine.run(flat);
  return engine.batch_result();
}

}  // namespace increvise
