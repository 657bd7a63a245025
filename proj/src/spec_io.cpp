#include "sam/spec_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "sam/dataflow.hpp"
#include "sam/density.hpp"
#include "sam/formats.hpp"

namespace sam {

namespace {

// ---------------------------------------------------------------------------
// YAML access with located errors
// ---------------------------------------------------------------------------

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  const std::string& source() const { return source_; }

  Location at(const YAML::Node& n) const {
    const auto m = n.Mark();
    if (m.is_null()) return {source_, 0, 0};
    return {source_, m.line + 1, m.column + 1};
  }

  [[noreturn]] void fail(ErrorKind kind, const YAML::Node& n, const std::string& entity, const std::string& msg) const {
    throw SpecError(kind, at(n), entity, msg);
  }

  YAML::Node load(const std::string& text) const {
    try {
      return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
      throw SpecError(ErrorKind::syntax, {source_, e.mark.line + 1, e.mark.column + 1}, "document", e.msg);
    } catch (const std::exception& e) {
      throw SpecError(ErrorKind::syntax, {source_, 0, 0}, "document", e.what());
    }
  }

  YAML::Node section(const YAML::Node& root, const std::string& key) const {
    if (!root.IsMap() || !root[key]) fail(ErrorKind::syntax, root, key, "missing top-level key '" + key + ":'");
    return root[key];
  }

  void keys(const YAML::Node& map, const std::string& entity, std::initializer_list<const char*> allowed) const {
    if (!map.IsMap()) fail(ErrorKind::syntax, map, entity, "expected a mapping");
    for (const auto& kv : map) {
      const auto k = kv.first.Scalar();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
        fail(ErrorKind::syntax, kv.first, entity, "unknown key '" + k + "'");
    }
  }

  YAML::Node required(const YAML::Node& map, const char* key, const std::string& entity) const {
    if (!map.IsMap() || !map[key]) fail(ErrorKind::syntax, map, entity, std::string("missing key '") + key + "'");
    return map[key];
  }

  std::string str(const YAML::Node& n, const std::string& entity) const {
    if (!n.IsScalar()) fail(ErrorKind::syntax, n, entity, "expected a scalar");
    return n.Scalar();
  }

  std::int64_t integer(const YAML::Node& n, const std::string& entity) const {
    const auto s = str(n, entity);
    std::int64_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(ErrorKind::syntax, n, entity, "expected an integer, got '" + s + "'");
    return v;
  }

  double number(const YAML::Node& n, const std::string& entity) const {
    const auto s = str(n, entity);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) fail(ErrorKind::syntax, n, entity, "expected a number, got '" + s + "'");
    return v;
  }

  bool boolean(const YAML::Node& n, const std::string& entity) const {
    const auto s = str(n, entity);
    if (s == "true" || s == "yes") return true;
    if (s == "false" || s == "no") return false;
    fail(ErrorKind::syntax, n, entity, "expected true or false, got '" + s + "'");
  }

  std::vector<std::string> names(const YAML::Node& n, const std::string& entity) const {
    if (!n.IsSequence()) fail(ErrorKind::syntax, n, entity, "expected a list");
    std::vector<std::string> out;
    for (const auto& x : n) out.push_back(str(x, entity));
    return out;
  }

  std::vector<YAML::Node> list(const YAML::Node& n, const std::string& entity) const {
    if (n.IsNull()) return {};
    if (!n.IsSequence()) fail(ErrorKind::syntax, n, entity, "expected a list");
    return {n.begin(), n.end()};
  }

 private:
  std::string source_;
};

// Runs `f`, turning stray library exceptions into located syntax errors.
template <class F>
auto guarded(const std::string& source, F&& f) {
  try {
    return f();
  } catch (const SpecError&) {
    throw;
  } catch (const YAML::Exception& e) {
    throw SpecError(ErrorKind::syntax, {source, e.mark.line + 1, e.mark.column + 1}, "document", e.msg);
  } catch (const ModelError& e) {
    throw SpecError(ErrorKind::invariant, {source, 0, 0}, "problem", e.what());
  }
}

const std::vector<std::pair<const char*, RankKind>> kRankNames = {
    {"U", RankKind::U}, {"UB", RankKind::UB}, {"B", RankKind::B},
    {"CP", RankKind::CP}, {"RLE", RankKind::RLE}, {"UOP", RankKind::UOP}};

const std::vector<std::pair<const char*, EnergyAction>> kActionNames = {
    {"read", EnergyAction::read},
    {"write", EnergyAction::write},
    {"metadata_read", EnergyAction::metadata_read},
    {"metadata_write", EnergyAction::metadata_write},
    {"compute", EnergyAction::compute}};

// ---------------------------------------------------------------------------
// Sections
// ---------------------------------------------------------------------------

DensityModelSpec parse_density(const Reader& r, const YAML::Node& n, const TensorDecl& t, const Workload& w,
                               const std::string& base_dir) {
  const std::string entity = "tensor " + t.name + " density";
  r.keys(n, entity, {"model", "density", "bernoulli", "n", "m", "dim", "band_width", "dims", "path"});
  DensityModelSpec d;
  const auto model = r.str(r.required(n, "model", entity), entity);
  auto in_projection = [&](const YAML::Node& node, const std::string& dim) {
    if (std::find(t.projection.begin(), t.projection.end(), dim) == t.projection.end())
      r.fail(ErrorKind::reference, node, entity, "dim '" + dim + "' is not in the projection of " + t.name);
  };
  if (model == "uniform") {
    d.kind = DensityKind::uniform;
    d.density = r.number(r.required(n, "density", entity), entity);
    if (!(d.density > 0.0 && d.density <= 1.0))
      r.fail(ErrorKind::invariant, n["density"], entity, "density must lie in (0, 1]");
    if (n["bernoulli"]) d.bernoulli = r.boolean(n["bernoulli"], entity);
  } else if (model == "fixed_structured") {
    d.kind = DensityKind::fixed_structured;
    d.n = r.integer(r.required(n, "n", entity), entity);
    d.m = r.integer(r.required(n, "m", entity), entity);
    d.dim = r.str(r.required(n, "dim", entity), entity);
    if (d.n < 1 || d.n > d.m) r.fail(ErrorKind::invariant, n["n"], entity, "need 1 <= n <= m");
    in_projection(n["dim"], d.dim);
    if (w.bound(w.dim_index(d.dim)) % d.m != 0)
      r.fail(ErrorKind::invariant, n["m"], entity, "block size m must divide the bound of '" + d.dim + "'");
  } else if (model == "banded") {
    d.kind = DensityKind::banded;
    d.band_width = r.integer(r.required(n, "band_width", entity), entity);
    d.band_dims = r.names(r.required(n, "dims", entity), entity);
    if (d.band_dims.size() != 2 || d.band_dims[0] == d.band_dims[1])
      r.fail(ErrorKind::invariant, n["dims"], entity, "a band spans exactly two distinct dims");
    for (const auto& x : d.band_dims) in_projection(n["dims"], x);
    const auto limit = std::min(w.bound(w.dim_index(d.band_dims[0])), w.bound(w.dim_index(d.band_dims[1])));
    if (d.band_width < 1 || d.band_width > limit)
      r.fail(ErrorKind::invariant, n["band_width"], entity, "band_width must lie in [1, " + std::to_string(limit) + "]");
  } else if (model == "actual_data") {
    d.kind = DensityKind::actual_data;
    d.path = r.str(r.required(n, "path", entity), entity);
    std::filesystem::path p(d.path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    d.data = load_actual_data(p.string());
    std::vector<std::int64_t> bounds;
    for (const auto& dim : t.projection) bounds.push_back(w.bound(w.dim_index(dim)));
    if (d.data->dims != bounds)
      r.fail(ErrorKind::invariant, n["path"], entity, "data file shape does not match the tensor's projection bounds");
  } else {
    r.fail(ErrorKind::syntax, n["model"], entity, "unknown density model '" + model + "'");
  }
  return d;
}

RepresentationFormat parse_format(const Reader& r, const YAML::Node& n, const TensorDecl& t, const std::string& entity) {
  if (n.IsScalar()) {
    try {
      return describe_classic_format(n.Scalar(), t.projection);
    } catch (const ModelError& e) {
      r.fail(ErrorKind::reference, n, entity, e.what());
    }
  }
  RepresentationFormat f;
  for (const auto& rank : r.list(n, entity)) {
    r.keys(rank, entity, {"kind", "dims", "width"});
    RankFormat rf;
    const auto kind = r.str(r.required(rank, "kind", entity), entity);
    const auto it = std::find_if(kRankNames.begin(), kRankNames.end(), [&](const auto& p) { return kind == p.first; });
    if (it == kRankNames.end()) r.fail(ErrorKind::syntax, rank["kind"], entity, "unknown rank format '" + kind + "'");
    rf.kind = it->second;
    rf.dims = r.names(r.required(rank, "dims", entity), entity);
    if (rank["width"]) {
      rf.width = static_cast<int>(r.integer(rank["width"], entity));
      if (*rf.width < 1 || *rf.width > 62) r.fail(ErrorKind::invariant, rank["width"], entity, "width must lie in [1, 62]");
    }
    f.ranks.push_back(std::move(rf));
  }
  if (f.ranks.empty()) r.fail(ErrorKind::invariant, n, entity, "a format needs at least one rank");
  try {
    rank_lengths(f, t.projection, std::vector<std::int64_t>(t.projection.size(), 1));
  } catch (const ModelError& e) {
    r.fail(ErrorKind::reference, n, entity, e.what());
  }
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------

SpecText read_spec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw SpecError(ErrorKind::io, {path, 0, 0}, "file", "cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return {ss.str(), path};
}

Workload parse_workload(const SpecText& text, const std::string& base_dir) {
  const Reader r(text.source);
  return guarded(text.source, [&] {
    const auto root = r.load(text.text);
    const auto n = r.section(root, "workload");
    r.keys(n, "workload", {"dims", "tensors"});
    Workload w;
    const auto dims = r.required(n, "dims", "workload");
    if (!dims.IsMap()) r.fail(ErrorKind::syntax, dims, "workload.dims", "expected a mapping of dim name to bound");
    for (const auto& kv : dims) {
      DimDecl d{r.str(kv.first, "dim"), r.integer(kv.second, "dim " + kv.first.Scalar())};
      if (d.bound < 1) r.fail(ErrorKind::invariant, kv.second, "dim " + d.name, "bound must be at least 1");
      if (w.dim_index(d.name) >= 0) r.fail(ErrorKind::invariant, kv.first, "dim " + d.name, "declared twice");
      w.dims.push_back(d);
    }
    std::vector<YAML::Node> density_nodes;
    for (const auto& tn : r.list(r.required(n, "tensors", "workload"), "workload.tensors")) {
      r.keys(tn, "tensor", {"name", "projection", "output", "density"});
      TensorDecl t;
      t.name = r.str(r.required(tn, "name", "tensor"), "tensor");
      const std::string entity = "tensor " + t.name;
      if (w.tensor_index(t.name) >= 0) r.fail(ErrorKind::invariant, tn, entity, "declared twice");
      t.projection = r.names(r.required(tn, "projection", entity), entity);
      for (const auto& d : t.projection)
        if (w.dim_index(d) < 0) r.fail(ErrorKind::reference, tn["projection"], entity, "unknown dim '" + d + "'");
      if (std::set<std::string>(t.projection.begin(), t.projection.end()).size() != t.projection.size())
        r.fail(ErrorKind::invariant, tn["projection"], entity, "projection repeats a dim");
      if (tn["output"]) t.is_output = r.boolean(tn["output"], entity);
      if (t.is_output && tn["density"])
        r.fail(ErrorKind::invariant, tn["density"], entity, "the output tensor takes no density model");
      if (!t.is_output && !tn["density"]) r.fail(ErrorKind::invariant, tn, entity, "operand tensors need a density model");
      density_nodes.push_back(tn["density"]);
      w.tensors.push_back(std::move(t));
    }
    const auto outputs = std::count_if(w.tensors.begin(), w.tensors.end(), [](const auto& t) { return t.is_output; });
    if (outputs != 1) r.fail(ErrorKind::invariant, n, "workload", "exactly one tensor must be the output");
    if (w.tensors.size() > 60) r.fail(ErrorKind::unsupported, n, "workload", "at most 60 tensors are supported");
    for (const auto& d : w.dims) {
      const bool used = std::any_of(w.tensors.begin(), w.tensors.end(), [&](const TensorDecl& t) {
        return std::find(t.projection.begin(), t.projection.end(), d.name) != t.projection.end();
      });
      if (!used) r.fail(ErrorKind::invariant, dims, "dim " + d.name, "no tensor indexes this dim");
    }
    for (std::size_t i = 0; i < w.tensors.size(); ++i)
      if (!w.tensors[i].is_output) w.tensors[i].density = parse_density(r, density_nodes[i], w.tensors[i], w, base_dir);
    return w;
  });
}

Architecture parse_architecture(const SpecText& text) {
  const Reader r(text.source);
  return guarded(text.source, [&] {
    const auto root = r.load(text.text);
    const auto n = r.section(root, "architecture");
    r.keys(n, "architecture", {"storage", "compute"});
    Architecture a;
    for (const auto& sn : r.list(r.required(n, "storage", "architecture"), "architecture.storage")) {
      r.keys(sn, "storage level",
             {"name", "capacity", "read_bandwidth", "write_bandwidth", "word_width", "metadata_word_width", "fanout"});
      StorageLevel s;
      s.name = r.str(r.required(sn, "name", "storage level"), "storage level");
      const std::string entity = "level " + s.name;
      if (a.level_index(s.name) >= 0) r.fail(ErrorKind::invariant, sn, entity, "declared twice");
      s.capacity_bits = r.number(r.required(sn, "capacity", entity), entity);
      s.read_bandwidth = r.number(r.required(sn, "read_bandwidth", entity), entity);
      s.write_bandwidth = r.number(r.required(sn, "write_bandwidth", entity), entity);
      if (sn["word_width"]) s.word_width = static_cast<int>(r.integer(sn["word_width"], entity));
      if (sn["metadata_word_width"]) s.metadata_word_width = static_cast<int>(r.integer(sn["metadata_word_width"], entity));
      if (sn["fanout"]) s.fanout = r.integer(sn["fanout"], entity);
      if (s.capacity_bits <= 0) r.fail(ErrorKind::invariant, sn["capacity"], entity, "capacity must be positive");
      if (s.read_bandwidth <= 0 || s.write_bandwidth <= 0)
        r.fail(ErrorKind::invariant, sn, entity, "bandwidths must be positive");
      if (s.word_width < 1 || s.metadata_word_width < 0) r.fail(ErrorKind::invariant, sn, entity, "word widths must be positive");
      if (s.fanout < 1) r.fail(ErrorKind::invariant, sn["fanout"], entity, "fanout must be at least 1");
      a.storage.push_back(std::move(s));
    }
    if (a.storage.empty()) r.fail(ErrorKind::invariant, n, "architecture", "at least one storage level is required");
    const auto cn = r.required(n, "compute", "architecture");
    r.keys(cn, "compute", {"name", "num_units"});
    if (cn["name"]) a.compute.name = r.str(cn["name"], "compute");
    a.compute.num_units = r.integer(r.required(cn, "num_units", "compute"), "compute");
    if (a.level_index(a.compute.name) >= 0)
      r.fail(ErrorKind::invariant, cn, "compute", "compute name clashes with a storage level");
    std::int64_t fan = 1;
    for (const auto& s : a.storage) fan *= s.fanout;
    if (a.compute.num_units != fan)
      r.fail(ErrorKind::invariant, cn["num_units"], "compute",
             "num_units " + std::to_string(a.compute.num_units) + " differs from the fanout product " + std::to_string(fan));
    return a;
  });
}

SafSpec parse_safs(const SpecText& text, const Workload& w, const Architecture& a) {
  const Reader r(text.source);
  return guarded(text.source, [&] {
    const auto root = r.load(text.text);
    const auto n = r.section(root, "sparse_optimizations");
    SafSpec spec;
    std::set<std::pair<std::string, std::string>> targeted;
    for (const auto& ln : r.list(n, "sparse_optimizations")) {
      r.keys(ln, "sparse optimization", {"level", "formats", "actions"});
      LevelSafs ls;
      ls.level = r.str(r.required(ln, "level", "sparse optimization"), "sparse optimization");
      const std::string entity = "level " + ls.level;
      const bool compute = ls.level == a.compute.name;
      if (!compute && a.level_index(ls.level) < 0) r.fail(ErrorKind::reference, ln["level"], entity, "unknown level");
      if (spec.find(ls.level)) r.fail(ErrorKind::invariant, ln, entity, "level listed twice");
      if (ln["formats"]) {
        if (compute) r.fail(ErrorKind::invariant, ln["formats"], entity, "the compute level stores no tensors");
        if (!ln["formats"].IsMap()) r.fail(ErrorKind::syntax, ln["formats"], entity, "expected tensor: format entries");
        for (const auto& kv : ln["formats"]) {
          const auto tname = r.str(kv.first, entity);
          const int t = w.tensor_index(tname);
          if (t < 0) r.fail(ErrorKind::reference, kv.first, entity, "unknown tensor '" + tname + "'");
          if (w.tensors[static_cast<std::size_t>(t)].is_output)
            r.fail(ErrorKind::unsupported, kv.first, entity, "the output tensor is stored uncompressed");
          ls.formats[tname] = parse_format(r, kv.second, w.tensors[static_cast<std::size_t>(t)], entity + " format of " + tname);
        }
      }
      if (ln["actions"]) {
        for (const auto& an : r.list(ln["actions"], entity)) {
          r.keys(an, entity, {"kind", "target", "condition_on"});
          ActionOptimization op;
          const auto kind = r.str(r.required(an, "kind", entity), entity);
          if (kind == "gate") op.kind = SafKind::gate;
          else if (kind == "skip") op.kind = SafKind::skip;
          else r.fail(ErrorKind::syntax, an["kind"], entity, "kind must be gate or skip");
          op.target = r.str(r.required(an, "target", entity), entity);
          if (an["condition_on"]) op.condition_on = r.names(an["condition_on"], entity);
          std::vector<std::string> followers;
          if (compute) {
            if (op.target != "compute") r.fail(ErrorKind::reference, an["target"], entity, "the compute level only targets 'compute'");
            followers.push_back("compute");
          } else {
            const int t = w.tensor_index(op.target);
            if (t < 0) r.fail(ErrorKind::reference, an["target"], entity, "unknown tensor '" + op.target + "'");
            if (op.condition_on.empty()) r.fail(ErrorKind::invariant, an, entity, "condition_on needs at least one tensor");
            followers.push_back(op.target);
          }
          for (const auto& c : op.condition_on) {
            const int t = w.tensor_index(c);
            if (t < 0) r.fail(ErrorKind::reference, an["condition_on"], entity, "unknown tensor '" + c + "'");
            if (w.tensors[static_cast<std::size_t>(t)].is_output)
              r.fail(ErrorKind::invariant, an["condition_on"], entity, "cannot condition on the output tensor");
          }
          const auto self = std::count(op.condition_on.begin(), op.condition_on.end(), op.target);
          if (self > 0) {
            if (op.condition_on.size() != 2 || self != 1)
              r.fail(ErrorKind::invariant, an["condition_on"], entity,
                     "'" + op.target + "' cannot be its own condition (double-sided needs exactly two tensors)");
            followers.push_back(op.condition_on[0] == op.target ? op.condition_on[1] : op.condition_on[0]);
          }
          for (const auto& f : followers)
            if (!targeted.insert({ls.level, f}).second)
              r.fail(ErrorKind::invariant, an, entity, "more than one optimization targets '" + f + "'");
          ls.actions.push_back(std::move(op));
        }
      }
      spec.levels.push_back(std::move(ls));
    }
    // Skipping needs the leader's metadata at that level.
    for (const auto& ls : spec.levels) {
      if (ls.level == a.compute.name) continue;
      for (const auto& op : ls.actions) {
        if (op.kind != SafKind::skip) continue;
        for (const auto& c : op.condition_on)
          if (c != op.target || op.condition_on.size() == 2)
            if (!spec.format(ls.level, c))
              throw SpecError(ErrorKind::invariant, {text.source, 0, 0}, "level " + ls.level,
                              "skipping conditioned on '" + c + "' needs it stored compressed or with a bitmask there");
      }
    }
    return spec;
  });
}

Mapping parse_mapping(const SpecText& text, const Workload& w, const Architecture& a) {
  const Reader r(text.source);
  return guarded(text.source, [&] {
    const auto root = r.load(text.text);
    const auto n = r.section(root, "mapping");
    Mapping m;
    const auto levels = r.list(n, "mapping");
    if (levels.size() != a.storage.size())
      r.fail(ErrorKind::invariant, n, "mapping",
             "expected " + std::to_string(a.storage.size()) + " levels, got " + std::to_string(levels.size()));
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& ln = levels[i];
      r.keys(ln, "mapping level", {"level", "keep", "loops"});
      LevelMapping lm;
      lm.level = r.str(r.required(ln, "level", "mapping level"), "mapping level");
      const std::string entity = "level " + lm.level;
      if (a.level_index(lm.level) < 0) r.fail(ErrorKind::reference, ln["level"], entity, "unknown level");
      if (lm.level != a.storage[i].name)
        r.fail(ErrorKind::invariant, ln["level"], entity, "levels must follow architecture order; expected '" + a.storage[i].name + "'");
      if (ln["keep"]) lm.keep = r.names(ln["keep"], entity);
      for (const auto& t : lm.keep)
        if (w.tensor_index(t) < 0) r.fail(ErrorKind::reference, ln["keep"], entity, "unknown tensor '" + t + "'");
      std::int64_t spatial = 1;
      if (ln["loops"]) {
        for (const auto& lp : r.list(ln["loops"], entity)) {
          r.keys(lp, entity, {"dim", "factor", "spatial"});
          Loop loop;
          loop.dim = r.str(r.required(lp, "dim", entity), entity);
          if (w.dim_index(loop.dim) < 0) r.fail(ErrorKind::reference, lp["dim"], entity, "unknown dim '" + loop.dim + "'");
          loop.factor = r.integer(r.required(lp, "factor", entity), entity);
          if (loop.factor < 1) r.fail(ErrorKind::invariant, lp["factor"], entity, "factor must be at least 1");
          if (lp["spatial"]) loop.spatial = r.boolean(lp["spatial"], entity);
          if (loop.spatial) spatial *= loop.factor;
          lm.loops.push_back(std::move(loop));
        }
      }
      if (spatial > a.storage[i].fanout)
        r.fail(ErrorKind::invariant, ln, entity,
               "spatial factors multiply to " + std::to_string(spatial) + ", exceeding fanout " + std::to_string(a.storage[i].fanout));
      m.levels.push_back(std::move(lm));
    }
    for (const auto& t : w.tensors) {
      const auto& keep = m.levels.front().keep;
      if (std::find(keep.begin(), keep.end(), t.name) == keep.end())
        r.fail(ErrorKind::invariant, levels.front(), "level " + m.levels.front().level,
               "the outermost level must keep every tensor (missing '" + t.name + "')");
    }
    // Residual factors go to a new outermost loop.
    for (const auto& d : w.dims) {
      std::int64_t p = 1;
      bool at_outer = false;
      for (std::size_t l = 0; l < m.levels.size(); ++l)
        for (const auto& lp : m.levels[l].loops)
          if (lp.dim == d.name) {
            p *= lp.factor;
            at_outer = at_outer || l == 0;
          }
      if (p == d.bound) continue;
      if (d.bound % p != 0 || at_outer)
        r.fail(ErrorKind::invariant, n, "dim " + d.name,
               "factors multiply to " + std::to_string(p) + " but the bound is " + std::to_string(d.bound));
      auto& outer = m.levels.front().loops;
      outer.insert(outer.begin(), Loop{d.name, d.bound / p, false});
    }
    return m;
  });
}

EnergyTable parse_energy(const SpecText& text, const Architecture& a) {
  const Reader r(text.source);
  return guarded(text.source, [&] {
    const auto root = r.load(text.text);
    const auto n = r.section(root, "energy_table");
    EnergyTable table;
    if (n.IsNull()) return table;
    if (!n.IsMap()) r.fail(ErrorKind::syntax, n, "energy_table", "expected component: actions entries");
    for (const auto& comp : n) {
      const auto name = r.str(comp.first, "energy_table");
      const std::string entity = "energy of " + name;
      if (name != a.compute.name && a.level_index(name) < 0)
        r.fail(ErrorKind::reference, comp.first, entity, "unknown component '" + name + "'");
      if (!comp.second.IsMap()) r.fail(ErrorKind::syntax, comp.second, entity, "expected action: energy entries");
      for (const auto& act : comp.second) {
        const auto aname = r.str(act.first, entity);
        const auto it = std::find_if(kActionNames.begin(), kActionNames.end(), [&](const auto& p) { return aname == p.first; });
        if (it == kActionNames.end()) r.fail(ErrorKind::syntax, act.first, entity, "unknown action '" + aname + "'");
        EnergyCost cost;
        if (act.second.IsScalar()) {
          cost.actual = r.number(act.second, entity);
        } else {
          r.keys(act.second, entity, {"actual", "gated"});
          cost.actual = r.number(r.required(act.second, "actual", entity), entity);
          if (act.second["gated"]) cost.gated = r.number(act.second["gated"], entity);
        }
        if (cost.actual < 0 || cost.gated < 0) r.fail(ErrorKind::invariant, act.second, entity, "energies must be nonnegative");
        if (cost.gated > cost.actual) r.fail(ErrorKind::invariant, act.second, entity, "gated energy exceeds actual energy");
        table.entries[{name, it->second}] = cost;
      }
    }
    return table;
  });
}

MapspaceConstraints parse_constraints(const SpecText& text, const Workload& w, const Architecture& a) {
  const Reader r(text.source);
  return guarded(text.source, [&] {
    const auto root = r.load(text.text);
    const auto n = r.section(root, "mapspace_constraints");
    MapspaceConstraints c;
    for (const auto& ln : r.list(n, "mapspace_constraints")) {
      r.keys(ln, "constraint", {"level", "keep", "temporal_factors", "spatial_factors", "factor_multiple_of", "order"});
      LevelConstraints lc;
      lc.level = r.str(r.required(ln, "level", "constraint"), "constraint");
      const std::string entity = "constraint on " + lc.level;
      if (a.level_index(lc.level) < 0) r.fail(ErrorKind::reference, ln["level"], entity, "unknown level");
      if (ln["keep"]) {
        lc.keep = r.names(ln["keep"], entity);
        for (const auto& t : *lc.keep)
          if (w.tensor_index(t) < 0) r.fail(ErrorKind::reference, ln["keep"], entity, "unknown tensor '" + t + "'");
      }
      auto factors = [&](const char* key, std::map<std::string, std::int64_t>& out) {
        if (!ln[key]) return;
        if (!ln[key].IsMap()) r.fail(ErrorKind::syntax, ln[key], entity, "expected dim: factor entries");
        for (const auto& kv : ln[key]) {
          const auto d = r.str(kv.first, entity);
          if (w.dim_index(d) < 0) r.fail(ErrorKind::reference, kv.first, entity, "unknown dim '" + d + "'");
          const auto f = r.integer(kv.second, entity);
          if (f < 1) r.fail(ErrorKind::invariant, kv.second, entity, "factors must be positive");
          out[d] = f;
        }
      };
      factors("temporal_factors", lc.temporal_factors);
      factors("spatial_factors", lc.spatial_factors);
      factors("factor_multiple_of", lc.factor_multiple_of);
      if (ln["order"]) {
        lc.order = r.names(ln["order"], entity);
        for (const auto& d : lc.order)
          if (w.dim_index(d) < 0) r.fail(ErrorKind::reference, ln["order"], entity, "unknown dim '" + d + "'");
      }
      c.levels.push_back(std::move(lc));
    }
    return c;
  });
}

void validate_safs_against_mapping(const SafSpec& safs, const Problem& p, const std::string& source) {
  const auto& w = p.workload;
  const auto& a = p.architecture;
  auto kept = [&](int level, const std::string& t) {
    const auto& keep = p.mapping.levels[static_cast<std::size_t>(level)].keep;
    return std::find(keep.begin(), keep.end(), t) != keep.end();
  };
  for (const auto& ls : safs.levels) {
    if (ls.level == a.compute.name) continue;
    const int level = a.level_index(ls.level);
    const std::string entity = "level " + ls.level;
    for (const auto& [t, f] : ls.formats)
      if (!kept(level, t))
        throw SpecError(ErrorKind::invariant, {source, 0, 0}, entity, "format given for '" + t + "', which is not kept there");
    for (const auto& op : ls.actions) {
      if (!kept(level, op.target))
        throw SpecError(ErrorKind::invariant, {source, 0, 0}, entity, "SAF target '" + op.target + "' is not kept there");
      for (const auto& c : op.condition_on)
        if (!kept(level, c))
          throw SpecError(ErrorKind::invariant, {source, 0, 0}, entity, "SAF condition '" + c + "' is not kept there");
      const int t = w.tensor_index(op.target);
      if (w.tensors[static_cast<std::size_t>(t)].is_output) {
        for (std::size_t l = static_cast<std::size_t>(level) + 1; l < a.storage.size(); ++l)
          if (kept(static_cast<int>(l), op.target))
            throw SpecError(ErrorKind::unsupported, {source, 0, 0}, entity,
                            "output optimizations apply only at the innermost level keeping '" + op.target + "'");
      }
    }
  }
}

Problem parse_problem(const SpecText& workload, const SpecText& arch, const SpecText& safs, const SpecText& mapping,
                      const SpecText& energy, const std::string& base_dir) {
  Problem p;
  p.workload = parse_workload(workload, base_dir);
  p.architecture = parse_architecture(arch);
  p.mapping = parse_mapping(mapping, p.workload, p.architecture);
  p.safs = parse_safs(safs, p.workload, p.architecture);
  validate_safs_against_mapping(p.safs, p, safs.source);
  p.energy = parse_energy(energy, p.architecture);
  return p;
}

Problem parse_problem(const std::string& workload, const std::string& arch, const std::string& safs,
                      const std::string& mapping, const std::string& energy, const std::string& base_dir) {
  return parse_problem(SpecText{workload, "workload"}, SpecText{arch, "architecture"}, SpecText{safs, "sparse_optimizations"},
                       SpecText{mapping, "mapping"}, SpecText{energy, "energy_table"}, base_dir);
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

std::string flow(const std::vector<std::string>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s + "]";
}

}  // namespace

std::string emit_workload(const Workload& w) {
  std::ostringstream os;
  os << "workload:\n  dims: {";
  for (std::size_t i = 0; i < w.dims.size(); ++i) os << (i ? ", " : "") << w.dims[i].name << ": " << w.dims[i].bound;
  os << "}\n  tensors:\n";
  for (const auto& t : w.tensors) {
    os << "    - name: " << t.name << "\n      projection: " << flow(t.projection) << "\n";
    if (t.is_output) os << "      output: true\n";
    if (!t.density) continue;
    const auto& d = *t.density;
    os << "      density: {model: " << to_string(d.kind);
    switch (d.kind) {
      case DensityKind::uniform:
        os << ", density: " << format_number(d.density);
        if (d.bernoulli) os << ", bernoulli: true";
        break;
      case DensityKind::fixed_structured: os << ", n: " << d.n << ", m: " << d.m << ", dim: " << d.dim; break;
      case DensityKind::banded: os << ", band_width: " << d.band_width << ", dims: " << flow(d.band_dims); break;
      case DensityKind::actual_data: os << ", path: \"" << d.path << "\""; break;
    }
    os << "}\n";
  }
  return os.str();
}

std::string emit_architecture(const Architecture& a) {
  std::ostringstream os;
  os << "architecture:\n  storage:\n";
  for (const auto& s : a.storage) {
    os << "    - {name: " << s.name << ", capacity: " << format_number(s.capacity_bits)
       << ", read_bandwidth: " << format_number(s.read_bandwidth) << ", write_bandwidth: " << format_number(s.write_bandwidth)
       << ", word_width: " << s.word_width << ", metadata_word_width: " << s.metadata_word_width << ", fanout: " << s.fanout
       << "}\n";
  }
  os << "  compute: {name: " << a.compute.name << ", num_units: " << a.compute.num_units << "}\n";
  return os.str();
}

std::string emit_safs(const SafSpec& s) {
  std::ostringstream os;
  os << "sparse_optimizations:" << (s.levels.empty() ? " []\n" : "\n");
  for (const auto& ls : s.levels) {
    os << "  - level: " << ls.level << "\n";
    if (!ls.formats.empty()) {
      os << "    formats:\n";
      for (const auto& [t, f] : ls.formats) {
        os << "      " << t << ":\n";
        for (const auto& r : f.ranks) {
          os << "        - {kind: " << to_string(r.kind) << ", dims: " << flow(r.dims);
          if (r.width) os << ", width: " << *r.width;
          os << "}\n";
        }
      }
    }
    if (!ls.actions.empty()) {
      os << "    actions:\n";
      for (const auto& a : ls.actions)
        os << "      - {kind: " << to_string(a.kind) << ", target: " << a.target
           << ", condition_on: " << flow(a.condition_on) << "}\n";
    }
  }
  return os.str();
}

std::string emit_mapping(const Mapping& m) {
  std::ostringstream os;
  os << "mapping:\n";
  for (const auto& l : m.levels) {
    os << "  - level: " << l.level << "\n    keep: " << flow(l.keep) << "\n    loops:" << (l.loops.empty() ? " []\n" : "\n");
    for (const auto& lp : l.loops)
      os << "      - {dim: " << lp.dim << ", factor: " << lp.factor << (lp.spatial ? ", spatial: true" : "") << "}\n";
  }
  return os.str();
}

std::string emit_energy(const EnergyTable& e) {
  std::ostringstream os;
  os << "energy_table:" << (e.entries.empty() ? " {}\n" : "\n");
  std::string current;
  for (const auto& [key, cost] : e.entries) {
    if (key.first != current) {
      os << "  " << key.first << ":\n";
      current = key.first;
    }
    os << "    " << to_string(key.second) << ": {actual: " << format_number(cost.actual)
       << ", gated: " << format_number(cost.gated) << "}\n";
  }
  return os.str();
}

std::string emit_report(const PerformanceReport& report, ReportFormat format) {
  std::ostringstream os;
  auto level_name = [&](int l) {
    return static_cast<std::size_t>(l) < report.level_names.size() ? report.level_names[static_cast<std::size_t>(l)]
                                                                    : std::to_string(l);
  };
  auto tensor_name = [&](int t) -> std::string {
    if (t < 0) return "—";
    return static_cast<std::size_t>(t) < report.tensor_names.size() ? report.tensor_names[static_cast<std::size_t>(t)]
                                                                     : std::to_string(t);
  };

  if (format == ReportFormat::csv) {
    os << "level,tensor,action,status,count\n";
    for (const auto& [key, c] : report.traffic.actions) {
      const std::string prefix = level_name(key.level) + "," + tensor_name(key.tensor) + "," + to_string(key.action) + ",";
      os << prefix << "actual," << format_number(c.actual) << "\n";
      os << prefix << "gated," << format_number(c.gated) << "\n";
      os << prefix << "skipped," << format_number(c.skipped()) << "\n";
    }
    return os.str();
  }

  os << std::fixed << std::setprecision(2);
  if (!report.valid) {
    const bool capacity = !report.capacity.valid;
    if (capacity) os << "INVALID: capacity exceeded at " << level_name(report.capacity.level) << "\n";
    else os << "INVALID: " << report.reason << "\n";
    if (capacity)
      os << "required bits: " << report.capacity.required_bits << "\navailable bits: " << report.capacity.available_bits << "\n";
    return os.str();
  }
  os << "valid: yes\n";
  os << "cycles: " << report.cycles << "\n";
  os << "energy (pJ): " << report.energy.total << "\n";
  os << "EDP: " << report.edp << "\n";
  os << "energy by component (pJ):\n";
  for (const auto& [name, e] : report.energy.per_component) os << "  " << name << ": " << e << "\n";
  os << "metadata bits per level:\n";
  for (std::size_t l = 0; l < report.metadata_bits.size(); ++l) os << "  " << level_name(static_cast<int>(l)) << ": " << report.metadata_bits[l] << "\n";
  os << "utilization:\n";
  for (std::size_t l = 0; l < report.utilization.size(); ++l) os << "  " << level_name(static_cast<int>(l)) << ": " << report.utilization[l] << "\n";
  os << "actions (actual / gated / skipped):\n";
  for (const auto& [key, c] : report.traffic.actions)
    os << "  " << level_name(key.level) << " " << tensor_name(key.tensor) << " " << to_string(key.action) << ": "
       << c.actual << " / " << c.gated << " / " << c.skipped() << "\n";
  return os.str();
}

}  // namespace sam
