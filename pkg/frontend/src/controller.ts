/** Review workflow state machine.
 *
 * Holds no derived document state of its own: every view is re-rendered
 * from the latest server response, and conflicts (HTTP 409) surface as a
 * banner without discarding what is on screen.
 */

import { ApiClient, ApiError } from "./api.js";
import { DocumentView, TaskSummary } from "./types.js";
import {
  renderBanner,
  renderDocument,
  renderNotification,
  renderQueue,
} from "./views.js";

/** Where rendered HTML goes; the browser adapter backs this with real DOM. */
export interface Host {
  setQueue(html: string): void;
  setDocument(html: string): void;
  setBanner(html: string): void;
}

export class ReviewController {
  tasks: TaskSummary[] = [];
  current: DocumentView | null = null;
  private openedAtMs: number | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly host: Host,
    private readonly now: () => number = () => Date.now(),
  ) {}

  async refreshQueue(): Promise<void> {
    this.tasks = await this.api.queue("pending");
    this.host.setQueue(renderQueue(this.tasks));
  }

  async open(docId: string): Promise<void> {
    this.current = await this.api.document(docId);
    this.openedAtMs = this.now(); // review timer starts on open
    this.host.setBanner("");
    this.host.setDocument(renderDocument(this.current));
  }

  async correct(field: string, value: string): Promise<void> {
    if (!this.current) throw new Error("no document open");
    try {
      const result = await this.api.submitCorrection(this.current.doc_id, field, value);
      this.current = result.document;
      this.host.setDocument(renderDocument(this.current));
      this.host.setBanner(result.inherited > 0 ? renderNotification(result.inherited) : "");
      await this.refreshQueue();
    } catch (error) {
      this.surface(error);
    }
  }

  async confirm(): Promise<void> {
    if (!this.current) throw new Error("no document open");
    const seconds =
      this.openedAtMs === null ? undefined : (this.now() - this.openedAtMs) / 1000;
    try {
      await this.api.confirm(this.current.doc_id, seconds);
      this.current = null;
      this.openedAtMs = null;
      this.host.setDocument("");
      this.host.setBanner("");
      await this.refreshQueue();
    } catch (error) {
      this.surface(error);
    }
  }

  /** 409s and other service errors become a banner; the view is untouched. */
  private surface(error: unknown): void {
    if (error instanceof ApiError) {
      this.host.setBanner(renderBanner(error.message));
      return;
    }
    throw error;
  }
}
