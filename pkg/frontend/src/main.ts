// Browser bootstrap: one participant token, the guided three-instance flow,
// and authoritative re-renders after every server response. One mutating
// request may be in flight at a time; the UI disables inputs while waiting.

import { GameApi } from './api.js';
import { SessionFlow } from './flow.js';
import { renderAnalyticsPanel, renderDecisionPanel, renderErrorBanner } from './panels.js';
import type { SessionView } from './types.js';

const TOKEN_KEY = 'invbench-participant';

function participantToken(): string {
  let token = window.localStorage.getItem(TOKEN_KEY);
  if (!token) {
    token = window.prompt('Participant token:')?.trim()
      || `anon-${Math.random().toString(36).slice(2, 10)}`;
    window.localStorage.setItem(TOKEN_KEY, token);
  }
  return token;
}

export function setupApp(root: HTMLElement, baseUrl: string,
                         participant: string): { flow: SessionFlow; start: () => Promise<void> } {
  const api = new GameApi(baseUrl);
  const flow = new SessionFlow(api, participant);

  const decision = document.createElement('div');
  decision.id = 'decision-panel';
  const analytics = document.createElement('div');
  analytics.id = 'analytics-panel';
  const progress = document.createElement('div');
  progress.id = 'progress-panel';
  root.replaceChildren(progress, decision, analytics);

  let busy = false;

  function renderProgress(): void {
    progress.replaceChildren();
    const heading = document.createElement('h1');
    heading.textContent = `Inventory game - participant ${participant}`;
    progress.appendChild(heading);
    const list = document.createElement('ol');
    list.setAttribute('data-testid', 'instance-list');
    for (const entry of flow.assignment?.instances ?? []) {
      const item = document.createElement('li');
      const state = entry.finished ? 'finished'
        : flow.isUnlocked(entry.index) ? 'available' : 'locked';
      item.setAttribute('data-testid', `instance-${entry.index}`);
      item.setAttribute('data-state', state);
      item.textContent = `Instance ${entry.index + 1} (mode ${entry.mode}): ${state}`;
      list.appendChild(item);
    }
    progress.appendChild(list);
    if (flow.done) {
      const doneBox = document.createElement('section');
      doneBox.setAttribute('data-testid', 'done-screen');
      const title = document.createElement('h2');
      title.textContent = 'All three instances complete';
      doneBox.appendChild(title);
      for (const final of flow.finals()) {
        const row = document.createElement('div');
        row.setAttribute('data-testid', `done-reward-${final.instance_index}`);
        row.textContent = `Instance ${final.instance_index + 1} ` +
          `(mode ${final.mode}): normalized reward ${final.normalized_reward}`;
        doneBox.appendChild(row);
      }
      progress.appendChild(doneBox);
    }
  }

  function renderSession(view: SessionView): void {
    renderDecisionPanel(decision, view, handlers, busy);
    renderAnalyticsPanel(analytics, view);
  }

  async function mutate(action: () => Promise<SessionView>): Promise<void> {
    if (busy) return;
    busy = true;
    if (flow.session) renderSession(flow.session);
    try {
      const view = await action();
      busy = false;
      renderProgress();
      if (view.status === 'finished') {
        renderSession(view);
        if (!flow.done) await advance();
      } else {
        renderSession(view);
      }
    } catch (err) {
      busy = false;
      renderErrorBanner(root, String(err), () => void refresh());
    }
  }

  const handlers = {
    submitOrder: (quantity: number) => void mutate(() => flow.submitOrder(quantity)),
    submitGuidance: (text: string) => void mutate(() => flow.submitGuidance(text)),
  };

  async function advance(): Promise<void> {
    if (flow.done) {
      renderProgress();
      return;
    }
    const view = await flow.startNext();
    renderProgress();
    renderSession(view);
  }

  async function refresh(): Promise<void> {
    await flow.load();
    renderProgress();
    if (flow.session) {
      renderSession(flow.session);
    } else if (!flow.done) {
      await advance();
    }
  }

  return { flow, start: refresh };
}

export function bootstrapBrowser(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app root');
  const baseUrl = (window as { INVBENCH_API?: string }).INVBENCH_API
    ?? window.location.origin;
  const { start } = setupApp(root, baseUrl, participantToken());
  void start().catch((err) => {
    renderErrorBanner(root, String(err), () => bootstrapBrowser());
  });
}

declare global {
  interface Window {
    INVBENCH_API?: string;
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  bootstrapBrowser();
}
