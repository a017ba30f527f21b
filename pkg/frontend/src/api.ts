/** Typed client for the annotation service HTTP API. */

export type Label = 'Positive' | 'Similar' | 'Negative';

export const LABELS: readonly Label[] = ['Positive', 'Similar', 'Negative'];

export interface TaskSlot {
  slot: number;
  /** Enhancement model identity; used to key labels, never displayed. */
  variant_id: number;
  url: string;
}

export interface Task {
  done: false;
  group_id: string;
  original_url: string;
  slots: TaskSlot[];
}

export interface DoneView {
  done: true;
  labeled: number;
}

export type TaskResponse = Task | DoneView;

export interface SubmitPayload {
  annotator: string;
  group: string;
  labels: Record<string, Label>;
  elapsed_ms: number;
}

export type SubmitResult = 'ok' | 'duplicate' | 'rejected';

export interface ApiClient {
  fetchTask(annotator: string): Promise<TaskResponse>;
  /** Resolves with the outcome; throws only on network failure. */
  submitLabels(payload: SubmitPayload): Promise<SubmitResult>;
  fetchProgress(annotator: string): Promise<{ labeled: number; remaining: number }>;
}

export class HttpApiClient implements ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  async fetchTask(annotator: string): Promise<TaskResponse> {
    const resp = await fetch(
      `${this.baseUrl}/api/task?annotator=${encodeURIComponent(annotator)}`,
    );
    if (!resp.ok) {
      throw new Error(`task fetch failed: ${resp.status}`);
    }
    return (await resp.json()) as TaskResponse;
  }

  async submitLabels(payload: SubmitPayload): Promise<SubmitResult> {
    const resp = await fetch(`${this.baseUrl}/api/labels`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
    if (resp.ok) return 'ok';
    if (resp.status === 409) return 'duplicate';
    return 'rejected';
  }

  async fetchProgress(annotator: string): Promise<{ labeled: number; remaining: number }> {
    const resp = await fetch(
      `${this.baseUrl}/api/progress?annotator=${encodeURIComponent(annotator)}`,
    );
    if (!resp.ok) {
      throw new Error(`progress fetch failed: ${resp.status}`);
    }
    return (await resp.json()) as { labeled: number; remaining: number };
  }
}
