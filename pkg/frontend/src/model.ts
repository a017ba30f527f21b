/** Session state for one task and the submit/retry flow around it.
 *
 * Labels are keyed by variant_id taken from the server task, never by
 * slot position, so reordering the display can never change what is
 * submitted. Elapsed time runs from task render to submit.
 */

import type { ApiClient, Label, SubmitPayload, Task, TaskResponse } from './api.js';

export type Clock = () => number;

export class TaskSession {
  private readonly labels = new Map<number, Label>();
  private readonly startedAt: number;
  private activeSlot = 0;

  constructor(
    readonly task: Task,
    private readonly now: Clock = Date.now,
  ) {
    this.startedAt = now();
  }

  get variantIds(): number[] {
    return this.task.slots.map((s) => s.variant_id);
  }

  labelFor(variantId: number): Label | undefined {
    return this.labels.get(variantId);
  }

  setLabel(variantId: number, label: Label): void {
    if (!this.variantIds.includes(variantId)) {
      throw new Error(`variant ${variantId} is not part of this task`);
    }
    this.labels.set(variantId, label);
  }

  /** Label by display position; resolves to the underlying variant. */
  setLabelBySlot(slot: number, label: Label): void {
    const entry = this.task.slots.find((s) => s.slot === slot);
    if (!entry) {
      throw new Error(`no slot ${slot}`);
    }
    this.setLabel(entry.variant_id, label);
  }

  get canSubmit(): boolean {
    return this.task.slots.every((s) => this.labels.has(s.variant_id));
  }

  /** Keyboard focus: which of the four variant panes shortcuts act on. */
  get active(): number {
    return this.activeSlot;
  }

  setActive(slot: number): void {
    if (slot >= 0 && slot < this.task.slots.length) {
      this.activeSlot = slot;
    }
  }

  elapsedMs(): number {
    return Math.max(0, Math.round(this.now() - this.startedAt));
  }

  buildPayload(annotator: string): SubmitPayload {
    if (!this.canSubmit) {
      throw new Error('cannot submit before all four variants are labeled');
    }
    const labels: Record<string, Label> = {};
    for (const slot of this.task.slots) {
      labels[String(slot.variant_id)] = this.labels.get(slot.variant_id)!;
    }
    return {
      annotator,
      group: this.task.group_id,
      labels,
      elapsed_ms: this.elapsedMs(),
    };
  }
}

export type FlowState =
  | { kind: 'task'; session: TaskSession }
  | { kind: 'done'; labeled: number }
  | { kind: 'offline'; queued: SubmitPayload };

/** Drives fetch -> label -> submit, with duplicate-skip and an
 * unchanged-payload retry queue for network failures. */
export class AnnotationFlow {
  state: FlowState | null = null;
  private queued: SubmitPayload | null = null;

  constructor(
    private readonly client: ApiClient,
    readonly annotator: string,
    private readonly now: Clock = Date.now,
  ) {}

  get queuedPayload(): SubmitPayload | null {
    return this.queued;
  }

  async start(): Promise<FlowState> {
    return this.advance();
  }

  private async advance(): Promise<FlowState> {
    const response: TaskResponse = await this.client.fetchTask(this.annotator);
    this.state = response.done
      ? { kind: 'done', labeled: response.labeled }
      : { kind: 'task', session: new TaskSession(response, this.now) };
    return this.state;
  }

  /** Submit the current session. 200 and 409 both advance; a network
   * failure freezes the payload for retry. */
  async submit(): Promise<FlowState> {
    if (this.state?.kind !== 'task') {
      throw new Error('nothing to submit');
    }
    const payload = this.state.session.buildPayload(this.annotator);
    return this.send(payload);
  }

  private async send(payload: SubmitPayload): Promise<FlowState> {
    try {
      await this.client.submitLabels(payload);
    } catch {
      this.queued = payload;
      this.state = { kind: 'offline', queued: payload };
      return this.state;
    }
    this.queued = null;
    return this.advance();
  }

  /** Re-send the queued payload byte for byte. */
  async retry(): Promise<FlowState> {
    if (!this.queued) {
      throw new Error('nothing queued');
    }
    return this.send(this.queued);
  }
}
