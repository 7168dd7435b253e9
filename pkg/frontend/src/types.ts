// API payload shapes (v1). The client renders these values verbatim and
// never recomputes rewards or statistics locally.

export type Mode = 'A' | 'B' | 'C';

export interface Parameters {
  profit: number;
  holding: number;
  promised_lead: number;
}

export interface DemandHistory {
  seed: number[];        // the five pre-game demand samples
  realized: number[];    // demands observed so far, periods 1..n
  mean: number;          // server-computed over seed + realized
  std: number;
}

export interface InventoryPoint {
  period: number;
  ending_inventory: number;
  arrivals: number;
  action: number;
}

export interface OrRecommendation {
  quantity: number;
  displayed_quantity: number;
  base_stock: number;
  inventory_position: number;
  demand_mean: number;
  demand_std: number;
  cap: number;
}

export interface AiProposal {
  period: number;
  quantity: number;
  displayed_quantity: number;
  short_rationale: string;
}

export interface FinalSummary {
  participant: string;
  instance: string;
  instance_index: number;
  mode: Mode;
  total_reward: number;
  normalized_reward: number;
  implicit_fractile: number;
}

export interface PeriodOutcome {
  period: number;
  arrivals: number;
  demand: number;
  sales: number;
  ending_inventory: number;
  reward: number;
  cumulative_reward?: number;
}

export interface GuidanceEntry {
  period: number;
  text: string;
}

export interface SessionView {
  session_id: string;
  participant: string;
  instance_id: string;
  instance_index: number;
  mode: Mode;
  status: 'active' | 'finished';
  horizon: number;
  period: number;
  product_description: string;
  parameters: Parameters;
  cumulative_reward: number;
  demand_history: DemandHistory;
  inventory_history: InventoryPoint[];
  latest_demand: number | null;
  last_outcome?: PeriodOutcome;
  autoplayed?: PeriodOutcome[];
  // active sessions only
  on_hand?: number;
  in_transit?: number;
  context?: string;
  previous_conclusion?: string | null;
  or_recommendation?: OrRecommendation;
  ai_proposal?: AiProposal | null;
  awaiting_guidance?: boolean;
  next_pause_period?: number;
  guidance_history?: GuidanceEntry[];
  // finished sessions only
  final?: FinalSummary;
}

export interface AssignmentEntry {
  index: number;
  id: string;
  product_description: string;
  mode: Mode;
  started: boolean;
  session_id: string | null;
  finished: boolean;
  final: FinalSummary | null;
}

export interface AssignmentView {
  participant: string;
  modes: Mode[];
  instances: AssignmentEntry[];
}
