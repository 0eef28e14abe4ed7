#include "imp/forms.hpp"

#include <string>

namespace imp {

PLMap::PLMap(std::shared_ptr<const SimplicialComplex> domain, std::shared_ptr<const CarrierMap> carrier,
             MinkowskiSignature signature, std::vector<Eigen::VectorXd> images)
    : domain_(std::move(domain)), carrier_(std::move(carrier)), signature_(signature), images_(std::move(images)) {
  if (!domain_ || !carrier_) throw FormError("map needs a domain and a carrier");
  signature_.validate();
  if (static_cast<int>(images_.size()) != domain_->vertex_count())
    throw FormError("map has " + std::to_string(images_.size()) + " images for " +
                    std::to_string(domain_->vertex_count()) + " vertices");
  if (static_cast<int>(carrier_->size()) != domain_->vertex_count()) throw FormError("carrier size mismatch");
  for (const auto& x : images_) {
    if (x.size() != signature_.dimension()) throw FormError("image dimension does not match signature");
    if (!x.allFinite()) throw FormError("non-finite image coordinate");
  }
}

PLMap PLMap::on(SimplicialComplex domain, MinkowskiSignature signature, std::vector<Eigen::VectorXd> images) {
  auto carrier = std::make_shared<const CarrierMap>(CarrierMap::identity(domain));
  return PLMap(std::make_shared<const SimplicialComplex>(std::move(domain)), std::move(carrier), signature,
               std::move(images));
}

bool PLMap::is_on_root() const {
  for (VertexId v = 0; v < domain_->vertex_count(); ++v) {
    const Carrier& c = (*carrier_)[v];
    if (c.support.size() != 1 || c.support[0] != v) return false;
  }
  return true;
}

PLMap PLMap::with_images(MinkowskiSignature signature, std::vector<Eigen::VectorXd> images) const {
  return PLMap(domain_, carrier_, signature, std::move(images));
}

EdgeMetric induced_edge_energies(const PLMap& f) {
  std::map<Edge, double> m;
  for (const Edge& e : f.domain().edges())
    m.emplace(e, minkowski_energy(Eigen::VectorXd(f.image(e.a) - f.image(e.b)), f.signature()));
  return EdgeMetric(std::move(m));
}

std::vector<PLMap> split_map(const PLMap& f, std::span<const MinkowskiSignature> blocks) {
  const MinkowskiSignature sig = f.signature();
  int start = 0;
  std::vector<PLMap> out;
  for (const auto& block : blocks) {
    block.validate();
    const int end = start + block.dimension();
    if (end > sig.dimension()) throw FormError("coordinate partition exceeds the target dimension");
    const int pos = std::max(0, std::min(end, sig.p) - start);
    const int neg = block.dimension() - pos;
    if (pos != block.p || neg != block.q)
      throw FormError("block (" + std::to_string(block.p) + "," + std::to_string(block.q) +
                      ") does not match coordinates " + std::to_string(start) + ".." + std::to_string(end - 1));
    std::vector<Eigen::VectorXd> images;
    images.reserve(f.images().size());
    for (const auto& x : f.images()) images.push_back(x.segment(start, block.dimension()));
    out.push_back(f.with_images(block, std::move(images)));
    start = end;
  }
  if (start != sig.dimension()) throw FormError("coordinate partition does not cover every coordinate");
  return out;
}

PLMap concatenate(std::span<const PLMap> parts) {
  if (parts.empty()) throw FormError("nothing to concatenate");
  MinkowskiSignature sig{0, 0};
  for (const auto& part : parts) {
    if (part.domain_ptr() != parts[0].domain_ptr() && !(part.domain() == parts[0].domain()))
      throw FormError("concatenated maps must share a domain");
    sig.p += part.signature().p;
    sig.q += part.signature().q;
  }
  const std::size_t n = parts[0].images().size();
  std::vector<Eigen::VectorXd> images(n, Eigen::VectorXd(sig.dimension()));
  for (std::size_t v = 0; v < n; ++v) {
    int pos = 0;
    int neg = sig.p;
    for (const auto& part : parts) {
      const auto& x = part.image(static_cast<VertexId>(v));
      const MinkowskiSignature s = part.signature();
      images[v].segment(pos, s.p) = x.head(s.p);
      images[v].segment(neg, s.q) = x.tail(s.q);
      pos += s.p;
      neg += s.q;
    }
  }
  return parts[0].with_images(sig, std::move(images));
}

}  // namespace imp
