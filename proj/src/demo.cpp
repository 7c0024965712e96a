#include "oed/model.hpp"

namespace oed {

// Layout of the reference tower, chosen so the observed response magnitude
// grows with tier level (the mounting of upper tiers is much softer than
// their coupling to the load path). Two unobserved "hub" nodes at the base
// carry the six load components; two stiff spines run from the hubs to the
// top tier, and each tier's sensor nodes hang off the spine of matching
// parity. Totals: 91 nodes, 89 observed (267 sensor DoFs), 6 loads.
TieredTowerConfig make_demo_config() {
  TieredTowerConfig c;
  c.dofs_per_node = 3;
  c.frequency = 20.0;
  c.extraction = ExtractionMode::real_part;

  // Node blocks, in order.
  const int n_base = 20, n_l1 = 24, n_l2 = 24, n_l3 = 15;
  c.tiers = {
      {2, 5.0, 0},       // load hubs (unobserved)
      {n_base, 5.0, 0},  // base sensors
      {2, 1.0, 1},       // spine, level 1
      {n_l1, 3.0, 1},
      {2, 1.0, 2},       // spine, level 2
      {n_l2, 2.0, 2},
      {2, 1.0, 3},       // spine, level 3
      {n_l3, 1.0, 3},
  };
  const int hub = 0;
  const int base0 = 2;
  const int spine1 = base0 + n_base;
  const int l1 = spine1 + 2;
  const int spine2 = l1 + n_l1;
  const int l2 = spine2 + 2;
  const int spine3 = l2 + n_l2;
  const int l3 = spine3 + 2;
  const int n_nodes = l3 + n_l3;

  auto add = [&](int i, int j, double k) { c.springs.push_back({i, j, k}); };

  // Hubs anchored to ground.
  add(hub, -1, 2.0e4);
  add(hub + 1, -1, 2.0e4);

  // Spines (parity b slightly stiffer so the two hub load paths differ).
  const double ks_a = 4.0e5, ks_b = 5.2e5;
  add(hub, spine1, ks_a);
  add(hub + 1, spine1 + 1, ks_b);
  add(spine1, spine2, ks_a);
  add(spine1 + 1, spine2 + 1, ks_b);
  add(spine2, spine3, ks_a);
  add(spine2 + 1, spine3 + 1, ks_b);

  // Tier sensor nodes: ground spring (mounting) + branch to the spine/hub of
  // matching parity; both vary across the tier so sensors are not redundant.
  struct TierWiring {
    int first, count, attach;  // attach = spine/hub pair base index
    double k_ground, k_branch, k_lat;
  };
  const TierWiring wiring[] = {
      {base0, n_base, hub, 2.0e5, 2.0e3, 1.0e3},
      {l1, n_l1, spine1, 2.0e4, 6.0e3, 2.0e3},
      {l2, n_l2, spine2, 4.0e3, 8.0e3, 2.0e3},
      {l3, n_l3, spine3, 1.0e2, 4.0e4, 5.0e3},
  };
  for (const auto& t : wiring) {
    for (int i = 0; i < t.count; ++i) {
      const double spread = static_cast<double>(i) / t.count;
      add(t.first + i, -1, t.k_ground * (1.0 + 0.3 * spread));
      add(t.first + i, t.attach + (i % 2), t.k_branch * (1.0 + 0.6 * spread));
      add(t.first + i, t.first + (i + 1) % t.count, t.k_lat);  // lateral ring
    }
  }

  // Observe every DoF except the two hubs.
  for (int n = 2; n < n_nodes; ++n)
    for (int a = 0; a < 3; ++a) c.observed_dofs.push_back(n * 3 + a);
  // Six load components: all three axes of each hub.
  c.loaded_dofs = {0, 1, 2, 3, 4, 5};
  return c;
}

}  // namespace oed
