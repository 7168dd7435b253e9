// Guided three-instance session flow: instances unlock strictly in order,
// progress resumes from server state after a refresh, and completion shows
// the server-reported rewards.

import type { GameApi } from './api.js';
import type { AssignmentView, FinalSummary, SessionView } from './types.js';

export class SessionFlow {
  assignment: AssignmentView | null = null;
  session: SessionView | null = null;

  constructor(private readonly api: GameApi,
              readonly participant: string) {}

  /** Create (or fetch) the assignment and resume any unfinished session. */
  async load(): Promise<void> {
    this.assignment = await this.api.createAssignment(this.participant);
    const open = this.assignment.instances.find(
      (entry) => entry.started && !entry.finished && entry.session_id);
    this.session = open?.session_id
      ? await this.api.getSession(open.session_id)
      : null;
  }

  /** Index of the next playable instance, or null when all are done.
   * Instance k unlocks only after instances 0..k-1 are finished. */
  nextIndex(): number | null {
    if (!this.assignment) return null;
    for (const entry of this.assignment.instances) {
      if (!entry.finished) return entry.index;
    }
    return null;
  }

  isUnlocked(index: number): boolean {
    if (!this.assignment) return false;
    return this.assignment.instances
      .filter((entry) => entry.index < index)
      .every((entry) => entry.finished);
  }

  get done(): boolean {
    return this.assignment !== null && this.nextIndex() === null;
  }

  /** Server-reported final summaries, in instance order. */
  finals(): FinalSummary[] {
    return (this.assignment?.instances ?? [])
      .map((entry) => entry.final)
      .filter((final): final is FinalSummary => final !== null);
  }

  /** Start the next instance (or return the resumed session). */
  async startNext(): Promise<SessionView> {
    if (this.session && this.session.status === 'active') {
      return this.session;
    }
    const index = this.nextIndex();
    if (index === null) {
      throw new Error('all instances are finished');
    }
    if (!this.isUnlocked(index)) {
      throw new Error(`instance ${index} is locked`);
    }
    this.session = await this.api.startSession(this.participant, index);
    return this.session;
  }

  private async afterMutation(view: SessionView): Promise<SessionView> {
    this.session = view;
    if (view.status === 'finished') {
      this.assignment = await this.api.getAssignment(this.participant);
      this.session = null;
    }
    return view;
  }

  async submitOrder(quantity: number): Promise<SessionView> {
    if (!this.session) throw new Error('no active session');
    return this.afterMutation(
      await this.api.submitOrder(this.session.session_id, quantity));
  }

  async submitGuidance(text: string): Promise<SessionView> {
    if (!this.session) throw new Error('no active session');
    return this.afterMutation(
      await this.api.submitGuidance(this.session.session_id, text));
  }
}
