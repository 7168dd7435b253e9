import { beforeEach, describe, expect, it } from 'vitest';

import { SessionFlow } from '../src/flow.js';
import type { AssignmentView, FinalSummary, SessionView } from '../src/types.js';
import { sessionView } from './fixtures.js';

/** In-memory fake of the GameApi surface the flow uses. */
class FakeApi {
  assignment: AssignmentView;
  sessions = new Map<string, SessionView>();
  startCalls: number[] = [];

  constructor() {
    this.assignment = {
      participant: 'alice',
      modes: ['A', 'B', 'C'],
      instances: [0, 1, 2].map((index) => ({
        index,
        id: `exp-${index}`,
        product_description: `Product ${index}`,
        mode: (['A', 'B', 'C'] as const)[index],
        started: false,
        session_id: null,
        finished: false,
        final: null,
      })),
    };
  }

  private final(index: number): FinalSummary {
    return {
      participant: 'alice', instance: `exp-${index}`, instance_index: index,
      mode: this.assignment.instances[index].mode,
      total_reward: 100 + index, normalized_reward: 0.5 + index / 10,
      implicit_fractile: 0.3,
    };
  }

  async createAssignment(): Promise<AssignmentView> {
    return structuredClone(this.assignment);
  }

  async getAssignment(): Promise<AssignmentView> {
    return structuredClone(this.assignment);
  }

  async startSession(_participant: string, index: number): Promise<SessionView> {
    this.startCalls.push(index);
    const entry = this.assignment.instances[index];
    if (entry.started) throw new Error('409 already played');
    entry.started = true;
    entry.session_id = `sess-${index}`;
    const view = sessionView({
      session_id: `sess-${index}`, instance_index: index, mode: entry.mode,
    });
    this.sessions.set(view.session_id, view);
    return structuredClone(view);
  }

  async getSession(sessionId: string): Promise<SessionView> {
    return structuredClone(this.sessions.get(sessionId)!);
  }

  /** Finish the session on the first order for test brevity. */
  async submitOrder(sessionId: string): Promise<SessionView> {
    const view = this.sessions.get(sessionId)!;
    const index = view.instance_index;
    const finished: SessionView = {
      ...view, status: 'finished', final: this.final(index),
    };
    this.sessions.set(sessionId, finished);
    const entry = this.assignment.instances[index];
    entry.finished = true;
    entry.final = this.final(index);
    return structuredClone(finished);
  }

  async submitGuidance(sessionId: string): Promise<SessionView> {
    return this.submitOrder(sessionId);
  }
}

let api: FakeApi;
let flow: SessionFlow;

beforeEach(async () => {
  api = new FakeApi();
  flow = new SessionFlow(api as never, 'alice');
  await flow.load();
});

describe('sequential unlocking', () => {
  it('starts at instance 0 with the rest locked', () => {
    expect(flow.nextIndex()).toBe(0);
    expect(flow.isUnlocked(0)).toBe(true);
    expect(flow.isUnlocked(1)).toBe(false);
    expect(flow.isUnlocked(2)).toBe(false);
  });

  it('completing instance 1 unlocks instance 2', async () => {
    await flow.startNext();
    await flow.submitOrder(11);
    expect(flow.nextIndex()).toBe(1);
    expect(flow.isUnlocked(1)).toBe(true);
    expect(flow.isUnlocked(2)).toBe(false);
    await flow.startNext();
    await flow.submitOrder(11);
    expect(flow.isUnlocked(2)).toBe(true);
  });

  it('finishing all three reports the server finals in order', async () => {
    for (let k = 0; k < 3; k += 1) {
      await flow.startNext();
      await flow.submitOrder(1);
    }
    expect(flow.done).toBe(true);
    const finals = flow.finals();
    expect(finals.map((f) => f.normalized_reward)).toEqual([0.5, 0.6, 0.7]);
    expect(api.startCalls).toEqual([0, 1, 2]);
  });
});

describe('refresh resume', () => {
  it('reloads mid-session state from the server', async () => {
    await flow.startNext();
    // simulate a page refresh: fresh flow against the same server state
    const resumed = new SessionFlow(api as never, 'alice');
    await resumed.load();
    expect(resumed.session?.session_id).toBe('sess-0');
    expect(resumed.session?.status).toBe('active');
    const again = await resumed.startNext();
    expect(again.session_id).toBe('sess-0');
    expect(api.startCalls).toEqual([0]);     // no duplicate start
  });

  it('after finishing, reload moves on to the next instance', async () => {
    await flow.startNext();
    await flow.submitOrder(2);
    const resumed = new SessionFlow(api as never, 'alice');
    await resumed.load();
    expect(resumed.session).toBeNull();
    expect(resumed.nextIndex()).toBe(1);
  });
});
