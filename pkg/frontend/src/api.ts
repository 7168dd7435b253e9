// Thin typed client for the game-service HTTP API. All game state lives on
// the server; every mutation returns the authoritative session view.

import type { AssignmentView, SessionView } from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, {
      headers: { 'Content-Type': 'application/json' },
      ...init,
    });
  } catch (err) {
    throw new ApiError(0, `network error: ${String(err)}`);
  }
  if (!response.ok) {
    let message = `${response.status} ${response.statusText}`;
    try {
      const body = await response.json();
      const detail = body?.detail;
      message = typeof detail === 'string' ? detail
        : detail?.message ?? JSON.stringify(detail ?? body);
    } catch {
      // keep the status line
    }
    throw new ApiError(response.status, message);
  }
  return response.json() as Promise<T>;
}

export class GameApi {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  health(): Promise<{ status: string; instances: string[]; agent: string }> {
    return request(this.url('/health'));
  }

  createAssignment(participant: string): Promise<AssignmentView> {
    return request(this.url('/assignments'), {
      method: 'POST',
      body: JSON.stringify({ participant }),
    });
  }

  getAssignment(participant: string): Promise<AssignmentView> {
    return request(this.url(`/assignments/${encodeURIComponent(participant)}`));
  }

  startSession(participant: string, instanceIndex: number): Promise<SessionView> {
    return request(this.url('/sessions'), {
      method: 'POST',
      body: JSON.stringify({ participant, instance_index: instanceIndex }),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(this.url(`/sessions/${sessionId}`));
  }

  submitOrder(sessionId: string, quantity: number): Promise<SessionView> {
    return request(this.url(`/sessions/${sessionId}/order`), {
      method: 'POST',
      body: JSON.stringify({ quantity }),
    });
  }

  submitGuidance(sessionId: string, text: string): Promise<SessionView> {
    return request(this.url(`/sessions/${sessionId}/guidance`), {
      method: 'POST',
      body: JSON.stringify({ text }),
    });
  }
}
