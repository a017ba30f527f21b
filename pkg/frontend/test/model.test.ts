import { describe, expect, it } from 'vitest';

import type { ApiClient, SubmitPayload, SubmitResult, Task, TaskResponse } from '../src/api.js';
import { AnnotationFlow, TaskSession } from '../src/model.js';

const PERMUTED: Task = {
  done: false,
  group_id: 'img-12-40',
  original_url: '/img/img-12-40/orig',
  slots: [
    { slot: 0, variant_id: 3, url: '/img/img-12-40/m3' },
    { slot: 1, variant_id: 1, url: '/img/img-12-40/m1' },
    { slot: 2, variant_id: 4, url: '/img/img-12-40/m4' },
    { slot: 3, variant_id: 2, url: '/img/img-12-40/m2' },
  ],
};

function fixedClock(values: number[]): () => number {
  let i = 0;
  return () => values[Math.min(i++, values.length - 1)];
}

describe('TaskSession', () => {
  it('refuses submission until all four variants are labeled', () => {
    const session = new TaskSession(PERMUTED);
    expect(session.canSubmit).toBe(false);
    session.setLabel(3, 'Positive');
    session.setLabel(1, 'Similar');
    session.setLabel(4, 'Negative');
    expect(session.canSubmit).toBe(false);
    expect(() => session.buildPayload('t1')).toThrow();
    session.setLabel(2, 'Positive');
    expect(session.canSubmit).toBe(true);
  });

  it('keys the payload by variant_id, not by slot position', () => {
    const session = new TaskSession(PERMUTED);
    // Label by display position: first shown pane gets Positive.
    session.setLabelBySlot(0, 'Positive');
    session.setLabelBySlot(1, 'Similar');
    session.setLabelBySlot(2, 'Negative');
    session.setLabelBySlot(3, 'Similar');
    const payload = session.buildPayload('t1');
    // Slot 0 holds variant 3, slot 2 holds variant 4.
    expect(payload.labels).toEqual({
      '3': 'Positive',
      '1': 'Similar',
      '4': 'Negative',
      '2': 'Similar',
    });
    expect(payload.group).toBe('img-12-40');
  });

  it('reports the same labels regardless of which addressing was used', () => {
    const bySlot = new TaskSession(PERMUTED);
    bySlot.setLabelBySlot(1, 'Negative');
    const byVariant = new TaskSession(PERMUTED);
    byVariant.setLabel(1, 'Negative');
    expect(bySlot.labelFor(1)).toBe('Negative');
    expect(byVariant.labelFor(1)).toBe('Negative');
  });

  it('measures elapsed from render to submit', () => {
    const clock = fixedClock([1_000, 1_000 + 22_790]);
    const session = new TaskSession(PERMUTED, clock);
    for (const id of [1, 2, 3, 4]) session.setLabel(id, 'Positive');
    expect(session.buildPayload('t1').elapsed_ms).toBe(22_790);
  });

  it('rejects labels for variants outside the task', () => {
    const session = new TaskSession(PERMUTED);
    expect(() => session.setLabel(9, 'Positive')).toThrow();
  });
});

class ScriptedClient implements ApiClient {
  tasks: TaskResponse[];
  submissions: SubmitPayload[] = [];
  results: (SubmitResult | 'network-error')[];

  constructor(tasks: TaskResponse[], results: (SubmitResult | 'network-error')[]) {
    this.tasks = [...tasks];
    this.results = [...results];
  }

  async fetchTask(): Promise<TaskResponse> {
    if (this.tasks.length > 1) return this.tasks.shift()!;
    return this.tasks[0];
  }

  async submitLabels(payload: SubmitPayload): Promise<SubmitResult> {
    const result = this.results.shift() ?? 'ok';
    if (result === 'network-error') {
      throw new TypeError('fetch failed');
    }
    this.submissions.push(payload);
    return result;
  }

  async fetchProgress(): Promise<{ labeled: number; remaining: number }> {
    return { labeled: 0, remaining: 0 };
  }
}

function secondTask(): Task {
  return {
    ...PERMUTED,
    group_id: 'img-90-8',
    slots: PERMUTED.slots.map((s) => ({ ...s, url: s.url.replace('12-40', '90-8') })),
  };
}

const DONE = { done: true as const, labeled: 2 };

describe('AnnotationFlow', () => {
  async function labeledFlow(client: ApiClient): Promise<AnnotationFlow> {
    const flow = new AnnotationFlow(client, 't1');
    const state = await flow.start();
    if (state.kind !== 'task') throw new Error('expected a task');
    for (const id of [1, 2, 3, 4]) state.session.setLabel(id, 'Positive');
    return flow;
  }

  it('advances to the next task on 200', async () => {
    const client = new ScriptedClient([PERMUTED, secondTask()], ['ok']);
    const flow = await labeledFlow(client);
    const state = await flow.submit();
    expect(state.kind).toBe('task');
    expect(state.kind === 'task' && state.session.task.group_id).toBe('img-90-8');
  });

  it('skips forward on 409 duplicate', async () => {
    const client = new ScriptedClient([PERMUTED, DONE], ['duplicate']);
    const flow = await labeledFlow(client);
    const state = await flow.submit();
    expect(state).toEqual({ kind: 'done', labeled: 2 });
  });

  it('shows the completion screen with the count after the last group', async () => {
    const client = new ScriptedClient([PERMUTED, DONE], ['ok']);
    const flow = await labeledFlow(client);
    const state = await flow.submit();
    expect(state).toEqual({ kind: 'done', labeled: 2 });
  });

  it('queues the unchanged payload on network failure and retries it', async () => {
    const client = new ScriptedClient([PERMUTED, DONE], ['network-error', 'ok']);
    const flow = await labeledFlow(client);
    const state = await flow.submit();
    expect(state.kind).toBe('offline');
    const queued = flow.queuedPayload;
    expect(queued).not.toBeNull();

    const after = await flow.retry();
    expect(client.submissions).toHaveLength(1);
    // Exactly the frozen payload went out, untouched.
    expect(client.submissions[0]).toBe(queued);
    expect(after).toEqual({ kind: 'done', labeled: 2 });
    expect(flow.queuedPayload).toBeNull();
  });

  it('re-fetching the pending task yields the identical permutation', async () => {
    // Server idempotency surfaced in the client: a refresh re-fetches
    // the same group with the same slot order.
    const first = new AnnotationFlow(new ScriptedClient([PERMUTED], []), 't1');
    const second = new AnnotationFlow(new ScriptedClient([PERMUTED], []), 't1');
    const a = await first.start();
    const b = await second.start();
    if (a.kind !== 'task' || b.kind !== 'task') throw new Error('expected tasks');
    expect(a.session.task.slots).toEqual(b.session.task.slots);
    expect(a.session.variantIds).toEqual([3, 1, 4, 2]);
  });
});
