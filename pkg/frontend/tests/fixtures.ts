import type { SessionView } from '../src/types.js';

export function sessionView(overrides: Partial<SessionView> = {}): SessionView {
  return {
    session_id: 'sess-0001',
    participant: 'alice',
    instance_id: 'exp-a',
    instance_index: 0,
    mode: 'A',
    status: 'active',
    horizon: 8,
    period: 3,
    product_description: 'Timeless swim brief',
    parameters: { profit: 4, holding: 1, promised_lead: 0 },
    cumulative_reward: 123.5,
    demand_history: {
      seed: [10, 11, 9, 10, 12],
      realized: [10, 12],
      mean: 10.571428571428571,
      std: 1.1338934190276817,
    },
    inventory_history: [
      { period: 1, ending_inventory: 2, arrivals: 12, action: 12 },
      { period: 2, ending_inventory: 0, arrivals: 10, action: 10 },
    ],
    latest_demand: 12,
    on_hand: 0,
    in_transit: 0,
    context: '',
    previous_conclusion: 'Period 2 conclude: arrivals 10; demand 12; sales 10; ending inventory 0.',
    or_recommendation: {
      quantity: 11.25,
      displayed_quantity: 11,
      base_stock: 11.25,
      inventory_position: 0,
      demand_mean: 10.571428571428571,
      demand_std: 1.1338934190276817,
      cap: 12.44,
    },
    ...overrides,
  };
}
