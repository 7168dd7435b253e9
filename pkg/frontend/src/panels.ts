// Decision and analytics panels. Rendering is a pure function of the
// session view; every number shown comes verbatim from the API payload.

import { demandChart, inventoryChart } from './charts.js';
import type { SessionView } from './types.js';

export interface DecisionHandlers {
  submitOrder: (quantity: number) => void;
  submitGuidance: (text: string) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, testId?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (testId) node.setAttribute('data-testid', testId);
  if (text !== undefined) node.textContent = text;
  return node;
}

function labelled(testId: string, label: string, value: unknown): HTMLElement {
  const row = el('div');
  row.appendChild(el('span', undefined, `${label}: `));
  row.appendChild(el('span', testId, String(value)));
  return row;
}

function header(view: SessionView): HTMLElement {
  const box = el('section', 'session-header');
  box.appendChild(el('h2', 'product-description', view.product_description));
  box.appendChild(labelled('mode', 'Mode', view.mode));
  box.appendChild(labelled('period', 'Period',
    `${view.period} / ${view.horizon}`));
  const p = view.parameters;
  box.appendChild(labelled('parameters', 'Profit / holding / promised lead',
    `${p.profit} / ${p.holding} / ${p.promised_lead}`));
  box.appendChild(labelled('cumulative-reward', 'Cumulative reward',
    view.cumulative_reward));
  if (view.on_hand !== undefined) {
    box.appendChild(labelled('on-hand', 'On hand', view.on_hand));
    box.appendChild(labelled('in-transit', 'In transit', view.in_transit));
  }
  if (view.latest_demand !== null && view.latest_demand !== undefined) {
    box.appendChild(labelled('latest-demand', 'Latest demand', view.latest_demand));
  }
  if (view.previous_conclusion) {
    box.appendChild(el('p', 'previous-conclusion', view.previous_conclusion));
  }
  if (view.context) {
    box.appendChild(el('p', 'context', view.context));
  }
  return box;
}

function orBlock(view: SessionView): HTMLElement {
  const rec = view.or_recommendation!;
  const box = el('section', 'or-block');
  box.appendChild(el('h3', undefined, 'Baseline recommendation'));
  box.appendChild(labelled('or-quantity', 'Order', `${rec.displayed_quantity}`));
  box.appendChild(labelled('or-base-stock', 'Base stock', rec.base_stock));
  box.appendChild(labelled('or-position', 'Inventory position',
    rec.inventory_position));
  box.appendChild(labelled('or-cap', 'Cap', rec.cap));
  return box;
}

function aiBlock(view: SessionView): HTMLElement {
  const proposal = view.ai_proposal!;
  const box = el('section', 'ai-block');
  box.appendChild(el('h3', undefined, 'Agent recommendation'));
  box.appendChild(labelled('ai-quantity', 'Order', proposal.displayed_quantity));
  box.appendChild(el('p', 'ai-short-rationale', proposal.short_rationale));
  return box;
}

function orderForm(handlers: DecisionHandlers, busy: boolean): HTMLElement {
  const form = el('form', 'order-form');
  const input = el('input', 'order-input') as HTMLInputElement;
  input.type = 'number';
  input.min = '0';
  input.step = '1';
  input.required = true;
  input.disabled = busy;
  const button = el('button', 'order-submit', 'Place order') as HTMLButtonElement;
  button.type = 'submit';
  button.disabled = busy;
  form.appendChild(input);
  form.appendChild(button);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const quantity = Number(input.value);
    if (!Number.isInteger(quantity) || quantity < 0) {
      input.setAttribute('data-invalid', 'true');
      return;
    }
    input.removeAttribute('data-invalid');
    handlers.submitOrder(quantity);
  });
  return form;
}

function guidanceBlock(view: SessionView, handlers: DecisionHandlers,
                       busy: boolean): HTMLElement {
  const box = el('section', 'guidance-block');
  box.appendChild(el('h3', undefined, 'Strategic guidance'));
  const atPause = view.awaiting_guidance === true;
  const form = el('form', 'guidance-form');
  const textarea = el('textarea', 'guidance-input') as HTMLTextAreaElement;
  textarea.disabled = !atPause || busy;
  const button = el('button', 'guidance-submit',
    'Send guidance and continue') as HTMLButtonElement;
  button.type = 'submit';
  button.disabled = !atPause || busy;
  form.appendChild(textarea);
  form.appendChild(button);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    handlers.submitGuidance(textarea.value);
  });
  box.appendChild(form);
  if (!atPause) {
    box.appendChild(el('p', 'next-pause',
      `The agent is playing autonomously; next pause at period ${view.next_pause_period}.`));
  }
  const history = view.guidance_history ?? [];
  if (history.length > 0) {
    const list = el('ul', 'guidance-history');
    for (const entry of history) {
      list.appendChild(el('li', undefined,
        `Before period ${entry.period}: ${entry.text || '(no guidance)'}`));
    }
    box.appendChild(list);
  }
  return box;
}

function finalBlock(view: SessionView): HTMLElement {
  const final = view.final!;
  const box = el('section', 'final-block');
  box.appendChild(el('h3', undefined, 'Instance complete'));
  box.appendChild(labelled('final-total-reward', 'Total reward',
    final.total_reward));
  box.appendChild(labelled('final-normalized-reward', 'Normalized reward',
    final.normalized_reward));
  return box;
}

/** Render the decision panel for the current mode.
 *  A: baseline recommendation + order input.
 *  B: baseline + agent recommendation with its short rationale + order input.
 *  C: read-only autoplay view; the guidance box is enabled only at pauses. */
export function renderDecisionPanel(container: HTMLElement, view: SessionView,
                                    handlers: DecisionHandlers,
                                    busy = false): void {
  container.replaceChildren();
  container.appendChild(header(view));
  if (view.status === 'finished') {
    container.appendChild(finalBlock(view));
    return;
  }
  if (view.mode === 'A' || view.mode === 'B') {
    container.appendChild(orBlock(view));
    if (view.mode === 'B' && view.ai_proposal) {
      container.appendChild(aiBlock(view));
    }
    container.appendChild(orderForm(handlers, busy));
  } else {
    container.appendChild(guidanceBlock(view, handlers, busy));
  }
}

/** Render the analytics panel: demand history with summary statistics and
 *  the inventory status chart. */
export function renderAnalyticsPanel(container: HTMLElement,
                                     view: SessionView): void {
  container.replaceChildren();
  const demand = el('section', 'demand-analytics');
  demand.appendChild(el('h3', undefined, 'Demand history'));
  demand.appendChild(demandChart(view.demand_history));
  demand.appendChild(labelled('demand-mean', 'Observed mean',
    view.demand_history.mean));
  demand.appendChild(labelled('demand-std', 'Observed std',
    view.demand_history.std));
  container.appendChild(demand);

  const inventory = el('section', 'inventory-analytics');
  inventory.appendChild(el('h3', undefined, 'Inventory status'));
  inventory.appendChild(inventoryChart(view.inventory_history));
  container.appendChild(inventory);
}

/** Retryable error banner for failed API calls. */
export function renderErrorBanner(container: HTMLElement, message: string,
                                  retry: () => void): void {
  const banner = el('div', 'error-banner');
  banner.appendChild(el('span', 'error-message', message));
  const button = el('button', 'error-retry', 'Retry') as HTMLButtonElement;
  button.addEventListener('click', () => {
    banner.remove();
    retry();
  });
  banner.appendChild(button);
  container.prepend(banner);
}
