#include "luxen/frame.hpp"

#include "luxen/sample.hpp"
#include "luxen/stats.hpp"

namespace luxen {

Stats& stats() noexcept {
  static Stats instance;
  return instance;
}

std::optional<std::size_t> FrameData::column_index(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i]->name() == name) return i;
  return std::nullopt;
}

const Column& FrameData::column(std::string_view name) const {
  if (auto i = column_index(name)) return *columns[*i];
  throw ColumnNotFound(std::string(name));
}

std::vector<std::string> FrameData::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c->name());
  return names;
}

std::string FrameData::row_label(std::size_t row) const {
  if (index.empty()) return std::to_string(row);
  std::string label;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i) label += ", ";
    label += index[i]->format(row);
  }
  return label;
}

std::string FrameData::index_name() const {
  if (index.empty()) return "index";
  std::string name;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (i) name += ", ";
    name += index[i]->name();
  }
  return name;
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void str(std::string_view s) {
    std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  void column(const Column& c) {
    str(c.name());
    auto t = static_cast<int>(c.type());
    bytes(&t, sizeof t);
    auto valid = c.validity();
    bytes(valid.data(), valid.size());
    auto ints = c.int_data();
    bytes(ints.data(), ints.size_bytes());
    auto floats = c.float_data();
    bytes(floats.data(), floats.size_bytes());
    for (const auto& s : c.string_data()) str(s);
  }
};

}  // namespace

std::uint64_t FrameData::content_hash() const {
  Fnv f;
  std::uint64_t n = rows;
  f.bytes(&n, sizeof n);
  for (const auto& c : index) f.column(*c);
  for (const auto& c : columns) f.column(*c);
  return f.h;
}

Frame::Frame(FrameData data, std::weak_ptr<Frame> parent)
    : data_(std::make_shared<const FrameData>(std::move(data))), parent_(std::move(parent)) {}

std::shared_ptr<Frame> Frame::create(FrameData data, std::weak_ptr<Frame> parent) {
  return std::make_shared<Frame>(std::move(data), std::move(parent));
}

std::shared_ptr<const FrameData> Frame::snapshot() const {
  std::lock_guard lock(mu_);
  return data_;
}

void Frame::replace_data(std::shared_ptr<const FrameData> next) {
  std::lock_guard lock(mu_);
  data_ = std::move(next);
}

void Frame::apply_inplace(const Transform& op) {
  auto next = transform_data(*snapshot(), op);
  replace_data(std::make_shared<const FrameData>(std::move(next)));
  switch (op.kind()) {
    case HistoryKind::set_column: expire(ExpiryTrigger::column_update); break;
    case HistoryKind::rename: expire(ExpiryTrigger::label_change); break;
    default: expire(ExpiryTrigger::inplace_modify); break;
  }
}

void Frame::set_intent(std::optional<IntentSpec> intent) {
  auto next = std::make_shared<FrameData>(*snapshot());
  next->intent = std::move(intent);
  ++next->intent_version;
  replace_data(std::move(next));
  expire(ExpiryTrigger::intent_change);
}

void Frame::set_type_override(const std::string& column, SemanticType type) {
  auto snap = snapshot();
  if (!snap->column_index(column)) throw ColumnNotFound(column);
  auto next = std::make_shared<FrameData>(*snap);
  next->overrides[column] = type;
  ++next->override_epoch;
  std::lock_guard lock(mu_);
  data_ = next;
  if (metadata_ && metadata_->version == next->version) {
    auto patched = std::make_shared<MetadataSet>(*metadata_);
    for (auto& m : patched->columns) {
      if (m.name == column) {
        m.semantic = type;
        m.overridden = true;
      }
    }
    metadata_ = std::move(patched);
  }
  dashboard_.reset();
}

void Frame::expire(ExpiryTrigger trigger) {
  std::lock_guard lock(mu_);
  dashboard_.reset();
  if (trigger == ExpiryTrigger::intent_change) return;
  metadata_.reset();
  sample_.reset();
}

std::shared_ptr<const MetadataSet> Frame::metadata() { return metadata_for(snapshot()); }

std::shared_ptr<const MetadataSet> Frame::metadata_for(const std::shared_ptr<const FrameData>& snap) {
  {
    std::lock_guard lock(mu_);
    if (metadata_ && metadata_->version == snap->version && data_->override_epoch == snap->override_epoch)
      return metadata_;
  }
  auto computed = std::make_shared<const MetadataSet>(compute_metadata(*snap));
  stats().metadata_computations++;
  std::lock_guard lock(mu_);
  if (data_->version == snap->version && data_->override_epoch == snap->override_epoch) metadata_ = computed;
  return computed;
}

bool Frame::metadata_valid() const {
  std::lock_guard lock(mu_);
  return metadata_ && metadata_->version == data_->version;
}

RecStamp Frame::rec_stamp(const FrameData& data, std::size_t k) {
  return RecStamp{data.version, data.intent_version, data.override_epoch, k};
}

RecStamp Frame::rec_stamp(std::size_t k) const { return rec_stamp(*snapshot(), k); }

std::shared_ptr<const Dashboard> Frame::cached_dashboard(const RecStamp& stamp) const {
  std::lock_guard lock(mu_);
  if (dashboard_ && dashboard_stamp_ == stamp && rec_stamp(*data_, stamp.k) == stamp) return dashboard_;
  return nullptr;
}

void Frame::store_dashboard(const RecStamp& stamp, std::shared_ptr<const Dashboard> dashboard) {
  std::lock_guard lock(mu_);
  if (rec_stamp(*data_, stamp.k) != stamp) return;
  dashboard_ = std::move(dashboard);
  dashboard_stamp_ = stamp;
}

bool Frame::recommendations_valid(std::size_t k) const {
  std::lock_guard lock(mu_);
  return dashboard_ && dashboard_stamp_ == rec_stamp(*data_, k);
}

std::shared_ptr<const SampleCache> Frame::cached_sample(std::uint64_t version, std::size_t cap,
                                                        std::uint64_t seed) const {
  std::lock_guard lock(mu_);
  if (sample_ && sample_->version == version && sample_->cap == cap && sample_->seed == seed) return sample_;
  return nullptr;
}

void Frame::store_sample(std::shared_ptr<const SampleCache> sample) {
  std::lock_guard lock(mu_);
  if (sample && sample->version == data_->version) sample_ = std::move(sample);
}

bool Frame::sample_valid() const {
  std::lock_guard lock(mu_);
  return sample_ && sample_->version == data_->version;
}

std::shared_ptr<Frame> apply_transform(const std::shared_ptr<Frame>& frame, const Transform& op) {
  if (op.inplace) {
    frame->apply_inplace(op);
    return frame;
  }
  return Frame::create(transform_data(*frame->snapshot(), op), frame);
}

MetadataSet compute_metadata(const FrameData& data) {
  MetadataSet set;
  set.version = data.version;
  set.rows = data.rows;
  set.columns.reserve(data.columns.size());
  for (const auto& col : data.columns) {
    auto meta = describe_column(*col);
    if (auto it = data.overrides.find(col->name()); it != data.overrides.end()) {
      meta.semantic = it->second;
      meta.overridden = true;
    } else {
      meta.semantic = infer_semantic_type(*col, meta, data.rows);
    }
    set.columns.push_back(std::move(meta));
  }
  return set;
}

std::vector<std::uint32_t> matching_rows(const FrameData& data, std::span<const Comparison> predicate,
                                         const std::vector<std::uint32_t>* within) {
  std::vector<RowMatcher> matchers;
  matchers.reserve(predicate.size());
  for (const auto& cmp : predicate) matchers.emplace_back(data.column(cmp.column), cmp.op, cmp.value);
  std::vector<std::uint32_t> out;
  auto test = [&](std::uint32_t r) {
    for (const auto& m : matchers)
      if (!m(r)) return false;
    return true;
  };
  if (within) {
    for (auto r : *within)
      if (test(r)) out.push_back(r);
  } else {
    for (std::uint32_t r = 0; r < data.rows; ++r)
      if (test(r)) out.push_back(r);
  }
  return out;
}

}  // namespace luxen
