#include "luxen/metadata.hpp"

#include <algorithm>
#include <bit>
#include <iterator>
#include <unordered_set>

namespace luxen {

const ColumnMetadata* MetadataSet::find(std::string_view name) const noexcept {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

const ColumnMetadata& MetadataSet::at(std::string_view name) const {
  if (auto* c = find(name)) return *c;
  throw ColumnNotFound(std::string(name));
}

namespace {


template <class T>
void store_uniques(std::vector<T>& sorted, const Column& col, ColumnMetadata& meta) {
  meta.cardinality = sorted.size();
  meta.capped = sorted.size() > kUniqueValueCap;
  if (sorted.size() > kUniqueValueCap) sorted.resize(kUniqueValueCap);
  meta.unique_values.reserve(sorted.size());
  for (auto& v : sorted) {
    if constexpr (std::is_same_v<T, std::int64_t>) {
      if (col.type() == StorageType::boolean) meta.unique_values.emplace_back(v != 0);
      else if (col.type() == StorageType::datetime) meta.unique_values.emplace_back(DateTime{v});
      else meta.unique_values.emplace_back(v);
    } else if constexpr (std::is_same_v<T, std::string_view>) {
      meta.unique_values.emplace_back(std::string(v));
    } else {
      meta.unique_values.emplace_back(v);
    }
  }
}

std::uint64_t order_key(std::int64_t v) { return static_cast<std::uint64_t>(v) ^ (1ULL << 63); }
std::uint64_t order_key(double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  return bits >> 63 ? ~bits : bits | (1ULL << 63);
}
template <class T>
T from_key(std::uint64_t k) {
  if constexpr (std::is_same_v<T, std::int64_t>) {
    return static_cast<std::int64_t>(k ^ (1ULL << 63));
  } else {
    return std::bit_cast<double>(k >> 63 ? k & ~(1ULL << 63) : ~k);
  }
}

// LSD radix sort, one byte per pass; passes where every key shares the byte are skipped.
void radix_sort(std::vector<std::uint64_t>& keys) {
  std::vector<std::uint64_t> tmp(keys.size());
  for (int shift = 0; shift < 64; shift += 8) {
    std::size_t count[257] = {};
    for (auto k : keys) ++count[((k >> shift) & 0xff) + 1];
    if (std::any_of(std::begin(count), std::end(count), [&](std::size_t c) { return c == keys.size(); })) continue;
    for (int i = 0; i < 256; ++i) count[i + 1] += count[i];
    for (auto k : keys) tmp[count[(k >> shift) & 0xff]++] = k;
    keys.swap(tmp);
  }
}

// Numbers: radix sort and dedupe a copy. Faster than hashing for dense columns.
template <class T>
void collect(std::span<const T> values, const Column& col, ColumnMetadata& meta) {
  std::vector<std::uint64_t> keys;
  keys.reserve(values.size() - col.null_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (col.is_null(i)) continue;
    T v = values[i];
    if constexpr (std::is_floating_point_v<T>) {
      if (v != v) continue;
      if (v == 0.0) v = 0.0;  // fold -0.0
    }
    keys.push_back(order_key(v));
  }
  radix_sort(keys);
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<T> v;
  v.reserve(std::min(keys.size(), kUniqueValueCap + 1));
  for (std::size_t i = 0; i < keys.size() && i <= kUniqueValueCap; ++i) v.push_back(from_key<T>(keys[i]));
  store_uniques(v, col, meta);
  meta.cardinality = keys.size();
  meta.capped = keys.size() > kUniqueValueCap;
}

void collect_strings(std::span<const std::string> values, const Column& col, ColumnMetadata& meta) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(1024);
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!col.is_null(i)) seen.insert(values[i]);
  std::vector<std::string_view> sorted(seen.begin(), seen.end());
  std::sort(sorted.begin(), sorted.end());
  store_uniques(sorted, col, meta);
}

// ISO 3166 short names (plus a few common aliases) and US states.
constexpr std::string_view kCountries[] = {
    "afghanistan", "albania", "algeria", "andorra", "angola", "antigua and barbuda", "argentina",
    "armenia", "australia", "austria", "azerbaijan", "bahamas", "bahrain", "bangladesh", "barbados",
    "belarus", "belgium", "belize", "benin", "bhutan", "bolivia", "bosnia and herzegovina", "botswana",
    "brazil", "brunei", "bulgaria", "burkina faso", "burundi", "cabo verde", "cape verde", "cambodia",
    "cameroon", "canada", "central african republic", "chad", "chile", "china", "colombia", "comoros",
    "congo", "democratic republic of the congo", "costa rica", "cote d'ivoire", "ivory coast", "croatia",
    "cuba", "cyprus", "czechia", "czech republic", "denmark", "djibouti", "dominica",
    "dominican republic", "ecuador", "egypt", "el salvador", "equatorial guinea", "eritrea", "estonia",
    "eswatini", "swaziland", "ethiopia", "fiji", "finland", "france", "gabon", "gambia", "georgia",
    "germany", "ghana", "greece", "grenada", "guatemala", "guinea", "guinea-bissau", "guyana", "haiti",
    "honduras", "hungary", "iceland", "india", "indonesia", "iran", "iraq", "ireland", "israel", "italy",
    "jamaica", "japan", "jordan", "kazakhstan", "kenya", "kiribati", "north korea", "south korea",
    "korea", "kosovo", "kuwait", "kyrgyzstan", "laos", "latvia", "lebanon", "lesotho", "liberia", "libya",
    "liechtenstein", "lithuania", "luxembourg", "madagascar", "malawi", "malaysia", "maldives", "mali",
    "malta", "marshall islands", "mauritania", "mauritius", "mexico", "micronesia", "moldova", "monaco",
    "mongolia", "montenegro", "morocco", "mozambique", "myanmar", "namibia", "nauru", "nepal",
    "netherlands", "new zealand", "nicaragua", "niger", "nigeria", "north macedonia", "macedonia",
    "norway", "oman", "pakistan", "palau", "palestine", "panama", "papua new guinea", "paraguay", "peru",
    "philippines", "poland", "portugal", "qatar", "romania", "russia", "russian federation", "rwanda",
    "saint kitts and nevis", "saint lucia", "saint vincent and the grenadines", "samoa", "san marino",
    "sao tome and principe", "saudi arabia", "senegal", "serbia", "seychelles", "sierra leone",
    "singapore", "slovakia", "slovenia", "solomon islands", "somalia", "south africa", "south sudan",
    "spain", "sri lanka", "sudan", "suriname", "sweden", "switzerland", "syria", "taiwan", "tajikistan",
    "tanzania", "thailand", "timor-leste", "east timor", "togo", "tonga", "trinidad and tobago",
    "tunisia", "turkey", "turkmenistan", "tuvalu", "uganda", "ukraine", "united arab emirates",
    "united kingdom", "uk", "united states", "united states of america", "usa", "us", "uruguay",
    "uzbekistan", "vanuatu", "vatican city", "venezuela", "vietnam", "viet nam", "yemen", "zambia",
    "zimbabwe", "hong kong", "puerto rico", "greenland", "england", "scotland", "wales",
};

constexpr std::string_view kStates[] = {
    "alabama", "alaska", "arizona", "arkansas", "california", "colorado", "connecticut", "delaware",
    "florida", "georgia", "hawaii", "idaho", "illinois", "indiana", "iowa", "kansas", "kentucky",
    "louisiana", "maine", "maryland", "massachusetts", "michigan", "minnesota", "mississippi",
    "missouri", "montana", "nebraska", "nevada", "new hampshire", "new jersey", "new mexico",
    "new york", "north carolina", "north dakota", "ohio", "oklahoma", "oregon", "pennsylvania",
    "rhode island", "south carolina", "south dakota", "tennessee", "texas", "utah", "vermont",
    "virginia", "washington", "west virginia", "wisconsin", "wyoming", "district of columbia",
};

}  // namespace

bool is_geographic_name(std::string_view value) {
  auto v = to_lower(trim(value));
  return std::find(std::begin(kCountries), std::end(kCountries), v) != std::end(kCountries) ||
         std::find(std::begin(kStates), std::end(kStates), v) != std::end(kStates);
}

bool is_geographic_column_name(std::string_view name) {
  auto n = to_lower(trim(name));
  return n == "country" || n == "state" || n == "county" || n == "city";
}

ColumnMetadata describe_column(const Column& column) {
  ColumnMetadata meta;
  meta.name = column.name();
  meta.storage = column.type();
  meta.all_null = column.null_count() == column.size();
  switch (column.type()) {
    case StorageType::floating: collect<double>(column.float_data(), column, meta); break;
    case StorageType::string: collect_strings(column.string_data(), column, meta); break;
    default: collect<std::int64_t>(column.int_data(), column, meta); break;
  }
  bool ordered = column.type() == StorageType::integer || column.type() == StorageType::floating ||
                 column.type() == StorageType::datetime;
  if (ordered && !meta.all_null) {
    double lo = 0, hi = 0;
    bool first = true;
    with_numeric(column, [&](auto values) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (column.is_null(i)) continue;
        double v = static_cast<double>(values[i]);
        if (first) { lo = hi = v; first = false; continue; }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    });
    meta.min = lo;
    meta.max = hi;
  }
  return meta;
}

SemanticType infer_semantic_type(const Column& column, const ColumnMetadata& meta, std::size_t /*row_count*/) {
  if (meta.overridden) return meta.semantic;
  if (column.type() == StorageType::datetime) return SemanticType::temporal;
  if (column.type() == StorageType::string) {
    std::size_t non_null = column.size() - column.null_count();
    if (non_null > 0) {
      // >= 95% of non-null cells must parse; stop early once that is impossible.
      std::size_t allowed_failures = non_null / 20, failures = 0;
      for (std::size_t i = 0; i < column.size() && failures <= allowed_failures; ++i) {
        if (column.is_null(i)) continue;
        if (!parse_iso_datetime(column.text(i))) ++failures;
      }
      if (failures * 20 <= non_null) return SemanticType::temporal;
    }
    if (is_geographic_column_name(column.name())) return SemanticType::geographic;
    if (!meta.capped && meta.cardinality > 0 &&
        std::all_of(meta.unique_values.begin(), meta.unique_values.end(),
                    [](const Cell& c) { return is_geographic_name(std::get<std::string>(c)); }))
      return SemanticType::geographic;
    return SemanticType::nominal;
  }
  if (column.type() == StorageType::floating) return SemanticType::quantitative;
  if (column.type() == StorageType::integer)
    return meta.cardinality <= kNominalCardinality ? SemanticType::nominal : SemanticType::quantitative;
  return SemanticType::nominal;
}

}  // namespace luxen
