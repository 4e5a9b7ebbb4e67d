#include "luxen/spec_doc.hpp"

#include <cmath>

namespace luxen {

namespace {

using ojson = nlohmann::ordered_json;

std::string_view vl_mark(Mark m) {
  switch (m) {
    case Mark::scatter:
    case Mark::color_scatter: return "point";
    case Mark::line:
    case Mark::color_line: return "line";
    case Mark::heatmap:
    case Mark::color_heatmap: return "rect";
    case Mark::bar:
    case Mark::color_bar:
    case Mark::histogram:
    case Mark::map: return "bar";
  }
  return "bar";
}

std::string_view vl_type(SemanticType t) {
  switch (t) {
    case SemanticType::quantitative: return "quantitative";
    case SemanticType::temporal: return "temporal";
    case SemanticType::nominal:
    case SemanticType::geographic: return "nominal";
  }
  return "nominal";
}

ojson number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ojson channel(const Encoding& e, const std::string& count_field, bool binned_data) {
  ojson c;
  if (e.is_count()) {
    c["field"] = count_field;
    c["type"] = "quantitative";
    c["title"] = "count";
    return c;
  }
  c["field"] = e.field;
  c["type"] = vl_type(e.type);
  if (e.is_measure()) {
    c["aggregate"] = to_string(e.aggregate);
    c["title"] = std::string(to_string(e.aggregate)) + "(" + e.field + ")";
  }
  if (binned_data && e.extent) {
    c["bin"] = "binned";
    c["type"] = "quantitative";
  } else if (e.bins) {
    c["bin"] = ojson{{"maxbins", *e.bins}};
  }
  if (e.time_unit) c["timeUnit"] = to_string(*e.time_unit);
  if (!e.is_measure() && e.type != SemanticType::quantitative) c["sort"] = nullptr;
  return c;
}

std::string count_field_of(const Vis& vis) {
  std::string name = kCountField;
  auto attrs = vis.spec.attributes();
  while (std::find(attrs.begin(), attrs.end(), name) != attrs.end()) name += "_";
  return name;
}

}  // namespace

ojson spec_summary(const CompiledVisSpec& spec) {
  ojson s;
  s["mark"] = to_string(spec.mark);
  auto enc = [](const Encoding& e) {
    ojson j;
    j["field"] = e.field;
    j["type"] = to_string(e.type);
    j["aggregate"] = to_string(e.aggregate);
    if (e.bins) j["bin_size"] = *e.bins;
    if (e.extent) j["extent"] = {e.extent->first, e.extent->second};
    if (e.time_unit) j["time_unit"] = to_string(*e.time_unit);
    return j;
  };
  ojson channels = ojson::object();
  if (spec.x) channels["x"] = enc(*spec.x);
  if (spec.y) channels["y"] = enc(*spec.y);
  if (spec.color) channels["color"] = enc(*spec.color);
  s["channels"] = channels;
  ojson filters = ojson::array();
  for (const auto& f : spec.filters) filters.push_back({{"attribute", f.column}, {"op", to_string(f.op)}, {"value", f.value}});
  s["filters"] = filters;
  if (spec.sort_descending) s["sort"] = "descending";
  if (spec.top_categories) s["top"] = *spec.top_categories;
  if (spec.structure != StructureKind::none) {
    s["structure"] = spec.structure == StructureKind::row_wise ? "row" : "column";
    s["structure_label"] = spec.structure_label;
  }
  return s;
}

ojson to_spec_doc(const Vis& vis) {
  const auto& spec = vis.spec;
  ojson doc;
  doc["$schema"] = "https://vega.github.io/schema/vega-lite/v5.json";
  doc["title"] = spec.title();
  doc["mark"] = ojson{{"type", vl_mark(spec.mark)}, {"tooltip", true}};

  std::string cf = count_field_of(vis);
  bool binned = spec.mark == Mark::histogram || spec.mark == Mark::heatmap || spec.mark == Mark::color_heatmap;
  ojson encoding = ojson::object();
  if (spec.structure != StructureKind::none) {
    if (spec.x) encoding["x"] = ojson{{"field", spec.x->field}, {"type", "nominal"}, {"sort", nullptr}};
    if (spec.y) encoding["y"] = ojson{{"field", spec.y->field}, {"type", "quantitative"}};
  } else {
    for (auto [name, e] : {std::pair{"x", &spec.x}, std::pair{"y", &spec.y}, std::pair{"color", &spec.color}}) {
      if (!*e) continue;
      encoding[name] = channel(**e, cf, binned);
      if (binned && (*e)->extent && std::string_view(name) != "color")
        encoding[std::string(name) + "2"] = ojson{{"field", (*e)->field + kBinEndSuffix}};
    }
  }
  doc["encoding"] = encoding;

  ojson values = ojson::array();
  if (vis.data) {
    const auto& d = *vis.data;
    for (std::size_t r = 0; r < d.rows(); ++r) {
      ojson row = ojson::object();
      for (const auto& c : d.columns) {
        if (c.numeric()) row[c.name] = number(c.numbers()[r]);
        else row[c.name] = c.labels()[r];
      }
      values.push_back(std::move(row));
    }
  }
  doc["data"] = ojson{{"values", values}};

  ojson meta;
  meta["mark"] = to_string(spec.mark);
  meta["frame_version"] = vis.frame_version;
  meta["score"] = vis.score ? number(*vis.score) : ojson(nullptr);
  meta["source_rows"] = vis.data ? vis.data->source_rows : 0;
  meta["spec"] = spec_summary(spec);
  doc["usermeta"] = ojson{{"luxen", meta}};
  return doc;
}

std::string spec_doc_string(const Vis& vis) { return to_spec_doc(vis).dump(); }

}  // namespace luxen
